// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "nrse/harness.hpp"

namespace nrse::harness {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects anything else, so a typo
// never silently falls back to a default.
class Section
{
public:
  Section(const json &j, std::string where) : j_(j), where_(std::move(where))
  {
    if (!j_.is_object()) { throw ConfigError(where_ + ": expected an object"); }
  }

  template <typename T>
  void get(const char *key, T &out)
  {
    seen_.insert(key);
    if (!j_.contains(key)) { return; }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception &e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void get_path(const char *key, fs::path &out)
  {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void get_window(const char *key, WindowKind &out)
  {
    std::string s = to_string(out);
    get(key, s);
    try {
      out = window_from_string(s);
    } catch (const Error &e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  std::optional<Section> sub(const char *key)
  {
    seen_.insert(key);
    if (!j_.contains(key)) { return std::nullopt; }
    return Section(j_.at(key), where_ + "." + key);
  }

  const json &raw(const char *key)
  {
    seen_.insert(key);
    return j_.at(key);
  }
  bool has(const char *key) const { return j_.contains(key); }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) { throw ConfigError(where_ + ": unknown key '" + it.key() + "'"); }
    }
  }

private:
  const json &j_;
  std::string where_;
  std::set<std::string> seen_;
};

json ins_json(const InsConfig &c)
{
  return {{"scales", c.scales},           {"n_surrogates", c.n_surrogates},   {"n_tapers", c.n_tapers},
          {"n_positions", c.n_positions}, {"min_taper_len", c.min_taper_len}, {"max_nfft", c.max_nfft},
          {"confidence", c.confidence}};
}

void read_ins(Section s, InsConfig &c)
{
  s.get("scales", c.scales);
  s.get("n_surrogates", c.n_surrogates);
  s.get("n_tapers", c.n_tapers);
  s.get("n_positions", c.n_positions);
  s.get("min_taper_len", c.min_taper_len);
  s.get("max_nfft", c.max_nfft);
  s.get("confidence", c.confidence);
  s.finish();
}

json hnh_json(const hnh::Params &p)
{
  const auto &a = p.absorption;
  json abs = {{"theta_ins", a.theta_ins},
              {"k", a.k},
              {"k_prime", a.k_prime},
              {"d0", a.d0},
              {"d0_prime", a.d0_prime},
              {"min_shift", a.min_shift},
              {"max_gain_nonstationary", a.max_gain_nonstationary},
              {"memory", a.memory},
              {"f_harm", a.f_harm},
              {"f_nonharm", a.f_nonharm},
              {"c_harm", a.c_harm},
              {"c_nonharm", a.c_nonharm},
              {"gain_floor", a.gain_floor},
              {"forced_absorption", a.forced_absorption ? json(*a.forced_absorption) : json(nullptr)}};
  return {{"frame_ms", p.frame_ms},
          {"overlap", p.overlap},
          {"window", to_string(p.window)},
          {"zc_th_ratio", p.zc_th_ratio},
          {"en_th_db", p.en_th_db},
          {"rg_len", p.rg_len},
          {"deviation", to_string(p.deviation)},
          {"absorption", abs},
          {"rg_ins", ins_json(p.rg_ins)}};
}

void read_hnh(Section s, hnh::Params &p)
{
  s.get("frame_ms", p.frame_ms);
  s.get("overlap", p.overlap);
  s.get_window("window", p.window);
  s.get("zc_th_ratio", p.zc_th_ratio);
  s.get("en_th_db", p.en_th_db);
  s.get("rg_len", p.rg_len);
  std::string dev = to_string(p.deviation);
  s.get("deviation", dev);
  try {
    p.deviation = hnh::deviation_from_string(dev);
  } catch (const Error &e) {
    throw ConfigError(std::string("hnh.deviation: ") + e.what());
  }
  if (auto a = s.sub("absorption")) {
    auto &ab = p.absorption;
    a->get("theta_ins", ab.theta_ins);
    a->get("k", ab.k);
    a->get("k_prime", ab.k_prime);
    a->get("d0", ab.d0);
    a->get("d0_prime", ab.d0_prime);
    a->get("min_shift", ab.min_shift);
    a->get("max_gain_nonstationary", ab.max_gain_nonstationary);
    a->get("memory", ab.memory);
    a->get("f_harm", ab.f_harm);
    a->get("f_nonharm", ab.f_nonharm);
    a->get("c_harm", ab.c_harm);
    a->get("c_nonharm", ab.c_nonharm);
    a->get("gain_floor", ab.gain_floor);
    if (a->has("forced_absorption")) {
      const json &f = a->raw("forced_absorption");
      if (f.is_null()) {
        ab.forced_absorption.reset();
      } else if (f.is_number()) {
        ab.forced_absorption = f.get<double>();
      } else {
        throw ConfigError("hnh.absorption.forced_absorption: expected a number or null");
      }
    }
    a->finish();
  }
  if (auto r = s.sub("rg_ins")) { read_ins(*r, p.rg_ins); }
  s.finish();
}

} // namespace

mask::OracleConfig IrmParams::oracle(int sample_rate) const
{
  mask::OracleConfig c;
  c.bands = bands;
  c.theta_db = theta_db;
  c.early_ms = early_ms;
  const Index len = std::max<Index>(Index(std::lround(frame_ms * sample_rate / 1000.0)), 2);
  c.framing = {len, std::max<Index>(Index(std::lround(double(len) * (1.0 - overlap))), 1), window};
  return c;
}

void Scenario::validate() const
{
  if (methods.empty()) { throw ConfigError("scenario.methods: at least one method is required"); }
  std::set<std::string> seen;
  for (const auto &m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw ConfigError("scenario.methods: unknown method '" + m + "'");
    }
    if (!seen.insert(m).second) { throw ConfigError("scenario.methods: duplicate method '" + m + "'"); }
  }
  if (snr_grid.empty() == stoi_targets.empty()) {
    throw ConfigError("scenario: exactly one of snr_grid and stoi_targets must be given");
  }
  for (double t : stoi_targets) {
    if (!(t > 0.0 && t < 1.0)) { throw ConfigError("scenario.stoi_targets: targets must lie in (0, 1)"); }
  }
  for (double s : snr_grid) {
    if (!std::isfinite(s)) { throw ConfigError("scenario.snr_grid: values must be finite"); }
  }
  if (clean_dir.empty() || rir_path.empty() || noise_path.empty() || output_dir.empty()) {
    throw ConfigError("scenario: clean_dir, rir_path, noise_path and output_dir are required");
  }
  if (max_utterances < 0 || calibration_utterances < 1) { throw ConfigError("scenario: bad utterance counts"); }
  if (!(stoi_tolerance > 0.0)) { throw ConfigError("scenario.stoi_tolerance must be positive"); }
  if (workers < 1) { throw ConfigError("scenario.workers must be at least 1"); }
  std::set<std::string> names(kBuiltinMetrics.begin(), kBuiltinMetrics.end());
  for (const auto &e : external) {
    if (e.name.empty() || e.command.empty()) { throw ConfigError("metrics.external: name and command are required"); }
    if (!names.insert(e.name).second) { throw ConfigError("metrics.external: duplicate metric '" + e.name + "'"); }
    if (!(e.timeout_s > 0.0)) { throw ConfigError("metrics.external: timeout must be positive"); }
  }
  try {
    params.hnh.validate();
    params.nnese.validate();
    params.omlsa.validate();
    require(params.irm.frame_ms > 0.0 && params.irm.overlap >= 0.0 && params.irm.overlap < 1.0,
            "irm: frame_ms must be positive and overlap in [0, 1)");
    const mask::OracleConfig oc = params.irm.oracle(16000);
    oc.validate();
    oc.framing.validate();
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> Scenario::metric_names() const
{
  std::vector<std::string> out = kBuiltinMetrics;
  for (const auto &e : external) { out.push_back(e.name); }
  return out;
}

json to_json(const Scenario &s)
{
  json ext = json::array();
  for (const auto &e : s.external) { ext.push_back({{"name", e.name}, {"command", e.command}, {"timeout_s", e.timeout_s}}); }
  const auto &p = s.params;
  const auto &t = p.omlsa.tracker;
  return {
      {"scenario",
       {{"clean_dir", s.clean_dir.string()},
        {"rir_path", s.rir_path.string()},
        {"noise_path", s.noise_path.string()},
        {"output_dir", s.output_dir.string()},
        {"snr_grid", s.snr_grid},
        {"stoi_targets", s.stoi_targets},
        {"methods", s.methods},
        {"seed", s.seed},
        {"max_utterances", s.max_utterances},
        {"calibration_utterances", s.calibration_utterances},
        {"stoi_tolerance", s.stoi_tolerance},
        {"workers", s.workers},
        {"save_audio", s.save_audio}}},
      {"metrics", {{"external", ext}}},
      {"hnh", hnh_json(p.hnh)},
      {"irm",
       {{"bands", p.irm.bands},
        {"theta_db", p.irm.theta_db},
        {"early_ms", p.irm.early_ms},
        {"frame_ms", p.irm.frame_ms},
        {"overlap", p.irm.overlap},
        {"window", to_string(p.irm.window)}}},
      {"nnese",
       {{"rho", p.nnese.rho},
        {"q", p.nnese.q},
        {"alpha", p.nnese.alpha},
        {"beta", p.nnese.beta},
        {"frame_ms", p.nnese.frame_ms}}},
      {"omlsa",
       {{"q1", p.omlsa.q1},
        {"q0", p.omlsa.q0},
        {"g1_db", p.omlsa.g1_db},
        {"g0_db", p.omlsa.g0_db},
        {"dd_alpha", p.omlsa.dd_alpha},
        {"xi_min_db", p.omlsa.xi_min_db},
        {"tracker",
         {{"smoothing", t.smoothing},
          {"window_s", t.window_s},
          {"bias", t.bias},
          {"speech_ratio", t.speech_ratio},
          {"floor", t.floor}}}}},
  };
}

Scenario scenario_from_json(const json &j)
{
  Scenario s;
  Section root(j, "config");
  if (auto sc = root.sub("scenario")) {
    sc->get_path("clean_dir", s.clean_dir);
    sc->get_path("rir_path", s.rir_path);
    sc->get_path("noise_path", s.noise_path);
    sc->get_path("output_dir", s.output_dir);
    sc->get("snr_grid", s.snr_grid);
    sc->get("stoi_targets", s.stoi_targets);
    sc->get("methods", s.methods);
    sc->get("seed", s.seed);
    sc->get("max_utterances", s.max_utterances);
    sc->get("calibration_utterances", s.calibration_utterances);
    sc->get("stoi_tolerance", s.stoi_tolerance);
    sc->get("workers", s.workers);
    sc->get("save_audio", s.save_audio);
    sc->finish();
  } else {
    throw ConfigError("config: missing 'scenario' section");
  }
  if (auto m = root.sub("metrics")) {
    if (m->has("external")) {
      const json &arr = m->raw("external");
      if (!arr.is_array()) { throw ConfigError("metrics.external: expected a list"); }
      for (const auto &item : arr) {
        Section e(item, "metrics.external[]");
        ExternalMetric em;
        e.get("name", em.name);
        e.get("command", em.command);
        e.get("timeout_s", em.timeout_s);
        e.finish();
        s.external.push_back(em);
      }
    }
    m->finish();
  }
  auto &p = s.params;
  if (auto h = root.sub("hnh")) { read_hnh(*h, p.hnh); }
  if (auto r = root.sub("irm")) {
    r->get("bands", p.irm.bands);
    r->get("theta_db", p.irm.theta_db);
    r->get("early_ms", p.irm.early_ms);
    r->get("frame_ms", p.irm.frame_ms);
    r->get("overlap", p.irm.overlap);
    r->get_window("window", p.irm.window);
    r->finish();
  }
  if (auto n = root.sub("nnese")) {
    n->get("rho", p.nnese.rho);
    n->get("q", p.nnese.q);
    n->get("alpha", p.nnese.alpha);
    n->get("beta", p.nnese.beta);
    n->get("frame_ms", p.nnese.frame_ms);
    n->finish();
  }
  if (auto o = root.sub("omlsa")) {
    o->get("q1", p.omlsa.q1);
    o->get("q0", p.omlsa.q0);
    o->get("g1_db", p.omlsa.g1_db);
    o->get("g0_db", p.omlsa.g0_db);
    o->get("dd_alpha", p.omlsa.dd_alpha);
    o->get("xi_min_db", p.omlsa.xi_min_db);
    if (auto t = o->sub("tracker")) {
      auto &tr = p.omlsa.tracker;
      t->get("smoothing", tr.smoothing);
      t->get("window_s", tr.window_s);
      t->get("bias", tr.bias);
      t->get("speech_ratio", tr.speech_ratio);
      t->get("floor", tr.floor);
      t->finish();
    }
    o->finish();
  }
  root.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const fs::path &path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot open config " + path.string()); }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::string param_hash(const Scenario &s)
{
  json j = to_json(s);
  j["scenario"].erase("output_dir");
  j["scenario"].erase("workers");
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace nrse::harness
