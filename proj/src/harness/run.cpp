// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "nrse/corpus.hpp"
#include "nrse/harness.hpp"
#include "nrse/ins.hpp"
#include "nrse/metrics.hpp"
#include "nrse/mixing.hpp"

namespace nrse::harness {

using nlohmann::json;

namespace {

std::string num(double v, int digits = 17)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string csv_field(const std::string &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) { return s; }
  std::string q = "\"";
  for (char c : s) { q += c == '"' ? std::string("\"\"") : std::string(1, c); }
  return q + "\"";
}

std::string utc_now()
{
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, int(ms));
  return buf;
}

std::vector<fs::path> wav_set(const fs::path &p, const char *what)
{
  if (fs::is_directory(p)) {
    auto v = corpus::list_wavs(p);
    if (v.empty()) { throw ConfigError(std::string(what) + ": no WAV files in " + p.string()); }
    return v;
  }
  if (!fs::is_regular_file(p)) { throw ConfigError(std::string(what) + ": no such file or directory " + p.string()); }
  return {p};
}

// Atomic replace so a reader never sees a half-written table.
void write_file(const fs::path &path, const std::string &content)
{
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(bool(out), "cannot write " + tmp.string());
    out << content;
    require(bool(out), "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::uint64_t job_key(std::uint64_t seed, Index u, Index r, Index n, Index c)
{
  std::uint64_t k = derive_seed(seed, std::uint64_t(u));
  k = derive_seed(k, 1000 + std::uint64_t(r));
  k = derive_seed(k, 2000 + std::uint64_t(n));
  return derive_seed(k, 3000 + std::uint64_t(c));
}

struct Condition
{
  Index room = 0, noise = 0;
  double snr_db = 0.0;
  std::optional<double> target;
};

std::string snr_label(const Condition &c)
{
  return c.target ? "stoi_" + num(*c.target, 6) : "snr_" + num(c.snr_db, 6);
}

} // namespace

Degraded degrade(const SampledSignal &clean, const SampledSignal &rir, const SampledSignal &noise, double snr_db,
                 Index noise_offset)
{
  Degraded d;
  d.reverberant = convolve_rir(clean, rir).head(clean.size());
  d.mixture = mix_at_snr(d.reverberant, noise, snr_db, NoiseFit::Loop, noise_offset % noise.size());
  return d;
}

namespace {

SampledSignal enhance_cached(const std::string &method, const SampledSignal &mixture, const SampledSignal &clean,
                             const SampledSignal &rir, const MethodParams &params, std::uint64_t seed,
                             std::optional<mask::TFMask> &irm)
{
  if (method == "unp") { return mixture; }
  if (method == "hnh") {
    hnh::Params p = params.hnh;
    p.seed = seed;
    return hnh::enhance(mixture, p);
  }
  const mask::OracleConfig oc = params.irm.oracle(mixture.sample_rate());
  if (!irm) { irm = mask::oracle_irm(clean, rir, mixture, oc); }
  if (method == "irmn") { return nnese::irmn_enhance(mixture, *irm, oc.framing, params.nnese); }
  if (method == "irmo") { return omlsa::irmo_enhance(mixture, *irm, oc.framing, params.omlsa); }
  throw Error("unknown method '" + method + "'");
}

} // namespace

SampledSignal enhance(const std::string &method, const SampledSignal &mixture, const SampledSignal &clean,
                      const SampledSignal &rir, const MethodParams &params, std::uint64_t seed)
{
  std::optional<mask::TFMask> irm;
  return enhance_cached(method, mixture, clean, rir, params, seed, irm);
}

Calibration calibrate_snr_for_stoi(const std::vector<SampledSignal> &clean, const SampledSignal &rir,
                                   const SampledSignal &noise, double stoi_target, double tol, int max_iter,
                                   std::uint64_t seed)
{
  require(stoi_target > 0.0 && stoi_target < 1.0, "calibrate_snr_for_stoi: target unreachable, must lie in (0, 1)");
  require(tol > 0.0 && max_iter >= 1, "calibrate_snr_for_stoi: bad tolerance or iteration count");
  require(!clean.empty(), "calibrate_snr_for_stoi: no calibration utterances");
  auto mean_stoi = [&](double snr) {
    double acc = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const Index off = Index(derive_seed(seed, i) % std::uint64_t(noise.size()));
      acc += metrics::stoi(clean[i], degrade(clean[i], rir, noise, snr, off).mixture);
    }
    return acc / double(clean.size());
  };

  Calibration c;
  c.target = stoi_target;
  double lo = -20.0, hi = 20.0;
  const double f_lo = mean_stoi(lo), f_hi = mean_stoi(hi);
  if (stoi_target <= f_lo || stoi_target >= f_hi) {
    const bool low = stoi_target <= f_lo;
    c.snr_db = low ? lo : hi;
    c.achieved = low ? f_lo : f_hi;
    c.converged = std::abs(c.achieved - stoi_target) <= tol;
    c.at_boundary = !c.converged;
    return c;
  }
  while (c.iterations < max_iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = mean_stoi(mid);
    ++c.iterations;
    c.snr_db = mid;
    c.achieved = f;
    if (std::abs(f - stoi_target) <= tol) {
      c.converged = true;
      break;
    }
    (f < stoi_target ? lo : hi) = mid;
  }
  return c;
}

int RunResult::exit_code() const
{
  return (jobs == 0 || failed_jobs * 10 > jobs) ? 1 : 0;
}

void write_records_csv(std::ostream &os, const std::vector<RunRecord> &records,
                       const std::vector<std::string> &metric_names)
{
  os << "utterance,room,noise,snr_db,stoi_target,snr_measured_db,method";
  for (const auto &m : metric_names) { os << ',' << csv_field(m); }
  os << ",param_hash\n";
  for (const auto &r : records) {
    os << csv_field(r.utterance) << ',' << csv_field(r.room) << ',' << csv_field(r.noise) << ',' << num(r.snr_db)
       << ',' << (r.stoi_target ? num(*r.stoi_target) : "") << ',' << num(r.snr_measured_db) << ','
       << r.method;
    for (const auto &v : r.scores) { os << ',' << (v ? num(*v) : ""); }
    os << ',' << r.param_hash << '\n';
  }
}

RunResult run_scenario(const Scenario &s, std::ostream *progress)
{
  s.validate();
  const std::string hash = param_hash(s);
  const std::vector<std::string> metric_names = s.metric_names();

  std::vector<fs::path> clean_paths = wav_set(s.clean_dir, "clean_dir");
  if (s.max_utterances > 0 && Index(clean_paths.size()) > s.max_utterances) {
    clean_paths.resize(std::size_t(s.max_utterances));
  }
  const std::vector<fs::path> rir_paths = wav_set(s.rir_path, "rir_path");
  const std::vector<fs::path> noise_paths = wav_set(s.noise_path, "noise_path");

  std::vector<SampledSignal> clean;
  for (const auto &p : clean_paths) {
    clean.push_back(load_wav(p, {clean.empty() ? 0 : clean.front().sample_rate()}));
  }
  const int rate = clean.front().sample_rate();
  std::vector<SampledSignal> rirs, noises;
  for (const auto &p : rir_paths) { rirs.push_back(load_wav(p, {rate})); }
  for (const auto &p : noise_paths) { noises.push_back(load_wav(p, {rate})); }

  fs::create_directories(s.output_dir);
  json stored = to_json(s);
  stored["param_hash"] = hash;
  write_file(s.output_dir / "config.json", stored.dump(2) + "\n");

  RunResult result;
  result.dir = s.output_dir;
  result.metric_names = metric_names;

  std::vector<Condition> conds;
  for (Index r = 0; r < Index(rirs.size()); ++r) {
    for (Index n = 0; n < Index(noises.size()); ++n) {
      for (double snr : s.snr_grid) { conds.push_back({r, n, snr, std::nullopt}); }
      if (s.stoi_targets.empty()) { continue; }
      const std::size_t ncal = std::min<std::size_t>(std::size_t(s.calibration_utterances), clean.size());
      const std::vector<SampledSignal> cal(clean.begin(), clean.begin() + std::ptrdiff_t(ncal));
      for (double t : s.stoi_targets) {
        const Calibration c = calibrate_snr_for_stoi(cal, rirs[std::size_t(r)], noises[std::size_t(n)], t,
                                                     s.stoi_tolerance, 20, derive_seed(s.seed, 4000));
        result.calibrations.push_back(c);
        conds.push_back({r, n, c.snr_db, t});
      }
    }
  }
  // Conditions sharing (room, noise) are contiguous; that order fixes the tables.

  struct Job
  {
    Index utt = 0, cond = 0;
    std::vector<RunRecord> records;
    std::vector<std::string> warnings;
    std::string error, started, finished;
  };
  std::vector<Job> jobs;
  for (Index u = 0; u < Index(clean.size()); ++u) {
    for (Index c = 0; c < Index(conds.size()); ++c) { jobs.push_back({u, c, {}, {}, {}, {}, {}}); }
  }
  result.jobs = Index(jobs.size());

  auto room_name = [&](Index r) { return rir_paths[std::size_t(r)].stem().string(); };
  auto noise_name = [&](Index n) { return noise_paths[std::size_t(n)].stem().string(); };

  auto run_job = [&](Job &job) {
    job.started = utc_now();
    const Condition &cd = conds[std::size_t(job.cond)];
    const SampledSignal &x = clean[std::size_t(job.utt)];
    const SampledSignal &rir = rirs[std::size_t(cd.room)];
    const SampledSignal &noise = noises[std::size_t(cd.noise)];
    const std::uint64_t key = job_key(s.seed, job.utt, cd.room, cd.noise, job.cond);
    const Degraded d = degrade(x, rir, noise, cd.snr_db, Index(key % std::uint64_t(noise.size())));
    const double measured = snr_db(d.reverberant.samples(), d.mixture.samples() - d.reverberant.samples());
    const std::string utt = clean_paths[std::size_t(job.utt)].stem().string();
    std::optional<mask::TFMask> irm;
    for (const auto &method : s.methods) {
      const SampledSignal y = enhance_cached(method, d.mixture, x, rir, s.params, derive_seed(key, 7), irm);
      RunRecord rec;
      rec.utterance = utt;
      rec.room = room_name(cd.room);
      rec.noise = noise_name(cd.noise);
      rec.snr_db = cd.snr_db;
      rec.stoi_target = cd.target;
      rec.snr_measured_db = measured;
      rec.method = method;
      rec.param_hash = hash;
      rec.scores = {metrics::stoi(x, y), metrics::asii_st(x, y), metrics::srmr(y)};
      fs::path wav;
      if (s.save_audio || !s.external.empty()) {
        wav = s.output_dir / "audio" / rec.room / rec.noise / snr_label(cd) / method / (utt + ".wav");
        fs::create_directories(wav.parent_path());
        write_wav(wav, y, WavEncoding::Float32);
      }
      for (const auto &e : s.external) {
        const auto r = metrics::external_metric(e.command, clean_paths[std::size_t(job.utt)], wav,
                                                std::chrono::milliseconds(std::llround(e.timeout_s * 1000.0)));
        if (!r.value) { job.warnings.push_back(e.name + " (" + method + "): " + r.error); }
        rec.scores.push_back(r.value);
      }
      job.records.push_back(std::move(rec));
    }
    job.finished = utc_now();
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      Job &job = jobs[i];
      try {
        run_job(job);
      } catch (const std::exception &e) {
        job.records.clear();
        job.error = e.what();
        job.finished = utc_now();
      }
      const std::size_t k = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        const Condition &cd = conds[std::size_t(job.cond)];
        *progress << '[' << k << '/' << jobs.size() << "] " << clean_paths[std::size_t(job.utt)].stem().string()
                  << ' ' << room_name(cd.room) << ' ' << noise_name(cd.noise) << ' ' << snr_label(cd)
                  << (job.error.empty() ? "" : " FAILED: " + job.error) << '\n';
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(s.workers, int(jobs.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) { pool.emplace_back(worker); }
    for (auto &t : pool) { t.join(); }
  }

  // Aggregation in job order, independent of scheduling.
  std::string log;
  log += json{{"event", "start"}, {"param_hash", hash}, {"jobs", jobs.size()}, {"time", utc_now()}}.dump() + "\n";
  for (const auto &job : jobs) {
    const Condition &cd = conds[std::size_t(job.cond)];
    json entry = {{"event", "job"},
                  {"utterance", clean_paths[std::size_t(job.utt)].stem().string()},
                  {"room", room_name(cd.room)},
                  {"noise", noise_name(cd.noise)},
                  {"snr_db", cd.snr_db},
                  {"status", job.error.empty() ? "ok" : "failed"},
                  {"started", job.started},
                  {"finished", job.finished}};
    if (!job.error.empty()) {
      entry["error"] = job.error;
      ++result.failed_jobs;
    }
    if (!job.warnings.empty()) { entry["warnings"] = job.warnings; }
    log += entry.dump() + "\n";
    for (const auto &r : job.records) { result.records.push_back(r); }
  }
  log += json{{"event", "end"},
              {"failed_jobs", result.failed_jobs},
              {"exit_code", result.exit_code()},
              {"time", utc_now()}}
             .dump() +
         "\n";
  write_file(s.output_dir / "run_log.jsonl", log);

  std::ostringstream rec_csv;
  write_records_csv(rec_csv, result.records, metric_names);
  write_file(s.output_dir / "records.csv", rec_csv.str());

  if (!result.calibrations.empty()) {
    std::ostringstream cal;
    cal << "room,noise,stoi_target,snr_db,achieved_stoi,iterations,converged,at_boundary\n";
    std::size_t i = 0;
    for (Index r = 0; r < Index(rirs.size()); ++r) {
      for (Index n = 0; n < Index(noises.size()); ++n) {
        for (std::size_t t = 0; t < s.stoi_targets.size(); ++t, ++i) {
          const Calibration &c = result.calibrations[i];
          cal << csv_field(room_name(r)) << ',' << csv_field(noise_name(n)) << ',' << num(c.target) << ','
              << num(c.snr_db) << ',' << num(c.achieved) << ',' << c.iterations << ',' << int(c.converged) << ','
              << int(c.at_boundary) << '\n';
        }
      }
    }
    write_file(s.output_dir / "calibration.csv", cal.str());
  }

  // Summary tables: one per (metric, room, noise); rows are conditions
  // plus an Average row, columns are methods. STOI is reported x100.
  std::map<std::tuple<Index, std::string, std::size_t>, std::pair<double, Index>> acc;
  std::map<std::string, std::size_t> method_index;
  for (std::size_t m = 0; m < s.methods.size(); ++m) { method_index[s.methods[m]] = m; }
  for (const auto &job : jobs) {
    for (const auto &r : job.records) {
      for (std::size_t k = 0; k < metric_names.size(); ++k) {
        if (!r.scores[k]) { continue; }
        auto &a = acc[{job.cond, r.method, k}];
        a.first += *r.scores[k] * (metric_names[k] == "stoi" ? 100.0 : 1.0);
        a.second += 1;
      }
    }
  }
  std::ostringstream tcsv;
  tcsv << "metric,room,noise,row,stoi_target,snr_db";
  for (const auto &m : s.methods) { tcsv << ',' << m; }
  tcsv << '\n';
  json tables = json::array();
  for (std::size_t k = 0; k < metric_names.size(); ++k) {
    for (Index r = 0; r < Index(rirs.size()); ++r) {
      for (Index n = 0; n < Index(noises.size()); ++n) {
        json rows = json::array();
        std::vector<double> sum(s.methods.size(), 0.0);
        std::vector<Index> cnt(s.methods.size(), 0);
        for (Index c = 0; c < Index(conds.size()); ++c) {
          const Condition &cd = conds[std::size_t(c)];
          if (cd.room != r || cd.noise != n) { continue; }
          const std::string row = cd.target ? num(*cd.target, 6) : num(cd.snr_db, 6);
          tcsv << csv_field(metric_names[k]) << ',' << csv_field(room_name(r)) << ',' << csv_field(noise_name(n))
               << ',' << row << ',' << (cd.target ? num(*cd.target, 12) : "") << ',' << num(cd.snr_db, 12);
          json values = json::object();
          for (std::size_t m = 0; m < s.methods.size(); ++m) {
            const auto it = acc.find({c, s.methods[m], k});
            tcsv << ',';
            if (it == acc.end() || it->second.second == 0) {
              values[s.methods[m]] = nullptr;
              continue;
            }
            const double v = it->second.first / double(it->second.second);
            tcsv << num(v, 12);
            values[s.methods[m]] = v;
            sum[m] += v;
            cnt[m] += 1;
          }
          tcsv << '\n';
          json jr = {{"row", row}, {"snr_db", cd.snr_db}, {"values", values}};
          if (cd.target) { jr["stoi_target"] = *cd.target; }
          rows.push_back(jr);
        }
        tcsv << csv_field(metric_names[k]) << ',' << csv_field(room_name(r)) << ',' << csv_field(noise_name(n))
             << ",Average,,";
        json avg = json::object();
        for (std::size_t m = 0; m < s.methods.size(); ++m) {
          tcsv << ',';
          if (cnt[m] == 0) {
            avg[s.methods[m]] = nullptr;
            continue;
          }
          const double v = sum[m] / double(cnt[m]);
          tcsv << num(v, 12);
          avg[s.methods[m]] = v;
        }
        tcsv << '\n';
        rows.push_back({{"row", "Average"}, {"values", avg}});
        tables.push_back({{"metric", metric_names[k]},
                          {"scale", metric_names[k] == "stoi" ? 100.0 : 1.0},
                          {"room", room_name(r)},
                          {"noise", noise_name(n)},
                          {"rows", rows}});
      }
    }
  }
  write_file(s.output_dir / "tables.csv", tcsv.str());
  write_file(s.output_dir / "tables.json",
             json{{"param_hash", hash}, {"methods", s.methods}, {"tables", tables}}.dump(2) + "\n");
  return result;
}

} // namespace nrse::harness
