// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "nrse/corpus.hpp"
#include "nrse/harness.hpp"
#include "nrse/ins.hpp"
#include "nrse/metrics.hpp"
#include "nrse/mixing.hpp"

using namespace nrse;
using namespace nrse::harness;
using nlohmann::json;

namespace {

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small corpus: short utterances, one room, one noise.
fs::path tiny_corpus(const std::string &name, int utterances = 2)
{
  const fs::path root = fs::temp_directory_path() / ("nrse_harness_" + name);
  fs::remove_all(root);
  fs::create_directories(root / "speech");
  fs::create_directories(root / "rir");
  fs::create_directories(root / "noise");
  for (int u = 0; u < utterances; ++u) {
    write_wav(root / "speech" / ("u" + std::to_string(u) + ".wav"), corpus::speech_like(derive_seed(9, u), 16000, 1.5));
  }
  write_wav(root / "rir" / "room.wav", corpus::exponential_rir(0.5), WavEncoding::Float32);
  write_wav(root / "noise" / "white.wav", corpus::white_noise(3, 16000, 4.0));
  return root;
}

Scenario tiny_scenario(const fs::path &root, const std::string &out)
{
  Scenario s;
  s.clean_dir = root / "speech";
  s.rir_path = root / "rir";
  s.noise_path = root / "noise" / "white.wav";
  s.output_dir = root / out;
  s.snr_grid = {0.0, -5.0};
  s.methods = {"unp", "irmo"};
  s.seed = 11;
  s.save_audio = false;
  return s;
}

Scenario valid_scenario()
{
  Scenario s;
  s.clean_dir = "a";
  s.rir_path = "b";
  s.noise_path = "c";
  s.output_dir = "d";
  s.snr_grid = {0.0};
  return s;
}

} // namespace

TEST_CASE("config: defaults are materialized and round-trip")
{
  const Scenario s = valid_scenario();
  const json j = to_json(s);
  CHECK(j["hnh"]["absorption"].contains("k"));
  CHECK(j["omlsa"]["tracker"].contains("window_s"));
  CHECK(j["nnese"]["rho"] == 4.0);
  CHECK(j["irm"]["theta_db"] == -6.0);
  const Scenario back = scenario_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(param_hash(back) == param_hash(s));
  CHECK(param_hash(s).size() == 16);

  Scenario moved = s;
  moved.output_dir = "elsewhere";
  moved.workers = 4;
  CHECK(param_hash(moved) == param_hash(s));
  Scenario changed = s;
  changed.params.hnh.absorption.k = 11.0;
  CHECK(param_hash(changed) != param_hash(s));
  changed = s;
  changed.seed = 1;
  CHECK(param_hash(changed) != param_hash(s));

  // Partial configs fill in the remaining defaults.
  json partial = {{"scenario",
                   {{"clean_dir", "a"}, {"rir_path", "b"}, {"noise_path", "c"}, {"output_dir", "d"}, {"snr_grid", {0}}}},
                  {"hnh", {{"absorption", {{"forced_absorption", 1.0}}}}}};
  const Scenario p = scenario_from_json(partial);
  CHECK(p.params.hnh.absorption.forced_absorption == 1.0);
  CHECK(p.methods == kMethods);
}

TEST_CASE("config: errors")
{
  json j = to_json(valid_scenario());
  auto fails = [&](auto mutate) {
    json k = j;
    mutate(k);
    CHECK_THROWS_AS(scenario_from_json(k), ConfigError);
  };
  fails([](json &k) { k["scenario"]["methods"] = json::array(); });
  fails([](json &k) { k["scenario"]["methods"] = {"unp", "wiener"}; });
  fails([](json &k) { k["scenario"]["methods"] = {"unp", "unp"}; });
  fails([](json &k) { k["scenario"]["stoi_targets"] = {0.5}; });
  fails([](json &k) { k["scenario"]["snr_grid"] = json::array(); });
  fails([](json &k) { k["scenario"]["stoi_targets"] = {1.01}; k["scenario"]["snr_grid"] = json::array(); });
  fails([](json &k) { k["scenario"]["snr_gird"] = {0}; });
  fails([](json &k) { k["hnh"]["absorption"]["kk"] = 1; });
  fails([](json &k) { k["hnh"]["window"] = "blackman"; });
  fails([](json &k) { k["hnh"]["deviation"] = "sideways"; });
  fails([](json &k) { k["nnese"]["q"] = 1.5; });
  fails([](json &k) { k["scenario"]["seed"] = "seven"; });
  fails([](json &k) { k["scenario"]["workers"] = 0; });
  fails([](json &k) { k["metrics"]["external"] = {{{"name", "stoi"}, {"command", "echo 1"}}}; });
  fails([](json &k) { k.erase("scenario"); });
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("degrade hits the nominal SNR against the reverberant signal")
{
  const SampledSignal x = corpus::speech_like(1, 16000, 1.5);
  const SampledSignal rir = corpus::exponential_rir(0.79);
  const SampledSignal noise = corpus::babble(2, 16000, 2.0);
  for (double snr : {10.0, 0.0, -5.0}) {
    const Degraded d = degrade(x, rir, noise, snr, 12345);
    REQUIRE(d.mixture.size() == x.size());
    REQUIRE(d.reverberant.size() == x.size());
    const double measured = snr_db(d.reverberant.samples(), d.mixture.samples() - d.reverberant.samples());
    CHECK(std::abs(measured - snr) <= 0.01);
  }
}

TEST_CASE("calibrate_snr_for_stoi: tolerance, ordering, bounds")
{
  std::vector<SampledSignal> cal;
  for (std::uint64_t u = 0; u < 3; ++u) { cal.push_back(corpus::speech_like(derive_seed(5, u), 16000, 2.0)); }
  const SampledSignal rir = corpus::exponential_rir(0.79);
  const SampledSignal noise = corpus::babble(8, 16000, 4.0);

  const Calibration hi = calibrate_snr_for_stoi(cal, rir, noise, 0.64, 0.005, 20, 3);
  const Calibration lo = calibrate_snr_for_stoi(cal, rir, noise, 0.44, 0.005, 20, 3);
  CHECK(hi.converged);
  CHECK(lo.converged);
  CHECK(std::abs(hi.achieved - 0.64) <= 0.005);
  CHECK(std::abs(lo.achieved - 0.44) <= 0.005);
  CHECK(lo.snr_db < hi.snr_db);

  // Re-measure at the returned SNR with the same noise offsets.
  double again = 0.0;
  for (std::size_t i = 0; i < cal.size(); ++i) {
    const Index off = Index(derive_seed(3, i) % std::uint64_t(noise.size()));
    again += metrics::stoi(cal[i], degrade(cal[i], rir, noise, hi.snr_db, off).mixture);
  }
  CHECK(again / 3.0 == doctest::Approx(hi.achieved).epsilon(1e-12));

  const Calibration top = calibrate_snr_for_stoi(cal, rir, noise, 0.999, 0.0001, 20, 3);
  CHECK(top.at_boundary);
  CHECK(top.snr_db == 20.0);
  // White noise leaves these signals above 0.44 even at -20 dB.
  const Calibration floor = calibrate_snr_for_stoi(cal, rir, corpus::white_noise(8, 16000, 4.0), 0.44, 0.005, 20, 3);
  CHECK(floor.at_boundary);
  CHECK(floor.snr_db == -20.0);
  CHECK(floor.achieved > 0.44);
  CHECK_THROWS_AS(calibrate_snr_for_stoi(cal, rir, noise, 1.01), Error);
  CHECK_THROWS_AS(calibrate_snr_for_stoi(cal, rir, noise, 0.0), Error);
}

TEST_CASE("run_scenario: records, tables, determinism")
{
  const fs::path root = tiny_corpus("run");
  Scenario s = tiny_scenario(root, "a");
  const RunResult a = run_scenario(s);
  CHECK(a.exit_code() == 0);
  CHECK(a.jobs == 4);
  CHECK(a.failed_jobs == 0);
  REQUIRE(a.records.size() == 8);
  for (const auto &r : a.records) {
    CHECK(std::abs(r.snr_measured_db - r.snr_db) <= 0.01);
    CHECK(r.param_hash == param_hash(s));
  }
  for (const char *f : {"config.json", "records.csv", "tables.csv", "tables.json", "run_log.jsonl"}) {
    CHECK(fs::exists(root / "a" / f));
  }

  SUBCASE("rerun and parallel run are byte-identical")
  {
    Scenario b = s;
    b.output_dir = root / "b";
    b.workers = 3;
    run_scenario(b);
    CHECK(slurp(root / "a" / "records.csv") == slurp(root / "b" / "records.csv"));
    CHECK(slurp(root / "a" / "tables.csv") == slurp(root / "b" / "tables.csv"));
    CHECK(slurp(root / "a" / "tables.json") == slurp(root / "b" / "tables.json"));
  }
  SUBCASE("average rows are the mean of the condition rows")
  {
    const json t = json::parse(slurp(root / "a" / "tables.json"));
    CHECK(t["tables"].size() == 3); // three metrics, one room, one noise
    for (const auto &table : t["tables"]) {
      const auto &rows = table["rows"];
      REQUIRE(rows.size() == 3);
      for (const std::string m : {"unp", "irmo"}) {
        const double mean = 0.5 * (rows[0]["values"][m].get<double>() + rows[1]["values"][m].get<double>());
        CHECK(std::abs(rows[2]["values"][m].get<double>() - mean) <= 1e-9);
      }
    }
    // STOI table cells are the x100 mean of the records.
    const auto &stoi0 = t["tables"][0]["rows"][0]["values"]["unp"];
    double acc = 0.0;
    for (const auto &r : a.records) {
      if (r.method == "unp" && r.snr_db == 0.0) { acc += *r.scores[0]; }
    }
    CHECK(stoi0.get<double>() == doctest::Approx(100.0 * acc / 2.0).epsilon(1e-12));
  }
  SUBCASE("records.csv reads back exactly")
  {
    const RecordTable t = read_records_csv(root / "a" / "records.csv");
    REQUIRE(t.records.size() == a.records.size());
    CHECK(t.metric_names == kBuiltinMetrics);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      CHECK(t.records[i].scores == a.records[i].scores);
      CHECK(t.records[i].snr_measured_db == a.records[i].snr_measured_db);
      CHECK(t.records[i].method == a.records[i].method);
    }
  }
}

TEST_CASE("run_scenario: unprocessed only")
{
  const fs::path root = tiny_corpus("unp", 1);
  Scenario s = tiny_scenario(root, "out");
  s.methods = {"unp"};
  s.snr_grid = {0.0};
  s.save_audio = true;
  const RunResult r = run_scenario(s);
  REQUIRE(r.records.size() == 1);
  const std::string tables = slurp(root / "out" / "tables.csv");
  CHECK(tables.rfind("metric,room,noise,row,stoi_target,snr_db,unp\n", 0) == 0);
  CHECK(tables.find("irmo") == std::string::npos);
  // The unp column is the score of the saved mixture itself.
  const SampledSignal x = load_wav(root / "speech" / "u0.wav");
  const SampledSignal y = load_wav(root / "out" / "audio" / "room" / "white" / "snr_0" / "unp" / "u0.wav");
  CHECK(metrics::stoi(x, y) == doctest::Approx(*r.records[0].scores[0]).epsilon(1e-5));
  CHECK(metrics::srmr(y) == doctest::Approx(*r.records[0].scores[2]).epsilon(1e-5));
}

TEST_CASE("run_scenario: failures, bad paths, external metrics")
{
  SUBCASE("unreadable utterances are logged and counted")
  {
    const fs::path root = tiny_corpus("fail", 2);
    std::ofstream(root / "speech" / "zz_broken.wav") << "not a wav file";
    Scenario s = tiny_scenario(root, "out");
    s.methods = {"unp"};
    s.snr_grid = {0.0};
    CHECK_THROWS(run_scenario(s)); // loading happens up front

    // A decodable but silent file fails inside its job instead.
    fs::remove(root / "speech" / "zz_broken.wav");
    write_wav(root / "speech" / "zz_silent.wav", {RealVector::Zero(16000), 16000});
    const RunResult r = run_scenario(s);
    CHECK(r.jobs == 3);
    CHECK(r.failed_jobs == 1);
    CHECK(r.exit_code() == 1);
    CHECK(r.records.size() == 2);
    const std::string log = slurp(root / "out" / "run_log.jsonl");
    CHECK(log.find("\"status\":\"failed\"") != std::string::npos);
  }
  SUBCASE("missing inputs are config errors")
  {
    Scenario s = valid_scenario();
    s.clean_dir = "/nonexistent/speech";
    CHECK_THROWS_AS(run_scenario(s), ConfigError);
  }
  SUBCASE("external metric columns")
  {
    const fs::path root = tiny_corpus("ext", 1);
    Scenario s = tiny_scenario(root, "out");
    s.methods = {"unp"};
    s.snr_grid = {0.0};
    s.external = {{"fake", "echo 2.50", 10.0}, {"broken", "false", 10.0}};
    const RunResult r = run_scenario(s);
    REQUIRE(r.records.size() == 1);
    REQUIRE(r.records[0].scores.size() == 5);
    CHECK(r.records[0].scores[3] == 2.5);
    CHECK_FALSE(r.records[0].scores[4]);
    CHECK(r.exit_code() == 0);
    CHECK(slurp(root / "out" / "run_log.jsonl").find("broken (unp)") != std::string::npos);
    const RecordTable t = read_records_csv(root / "out" / "records.csv");
    CHECK(t.metric_names.back() == "broken");
    CHECK_FALSE(t.records[0].scores[4]);
  }
}

TEST_CASE("report: deltas against unprocessed")
{
  const fs::path root = tiny_corpus("report");
  Scenario s = tiny_scenario(root, "run");
  run_scenario(s);
  const Report rep = report(root / "run");
  REQUIRE(rep.methods.size() == 2);
  CHECK(rep.methods[0].method == "unp");

  // Re-aggregate from the raw records.
  const RecordTable t = read_records_csv(root / "run" / "records.csv");
  std::map<std::string, std::vector<double>> sum;
  std::map<std::string, int> n;
  for (const auto &r : t.records) {
    auto &v = sum[r.method];
    v.resize(3, 0.0);
    for (int k = 0; k < 3; ++k) { v[std::size_t(k)] += *r.scores[std::size_t(k)]; }
    n[r.method] += 1;
  }
  for (const auto &m : rep.methods) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double mean = sum[m.method][k] / n[m.method];
      const double delta = mean - sum["unp"][k] / n["unp"];
      CHECK(std::abs(*m.mean[k] - mean) <= 1e-9);
      CHECK(std::abs(*m.delta[k] - delta) <= 1e-9);
    }
  }
  CHECK(*rep.methods[0].delta[0] == 0.0);
  for (const char *f : {"report.md", "report.csv", "box_stoi.dat", "box_srmr.dat"}) {
    CHECK(fs::exists(root / "run" / f));
  }

  const fs::path empty = root / "empty";
  fs::create_directories(empty);
  CHECK_THROWS_AS(report(empty), Error);
  std::ofstream(empty / "records.csv") << "utterance,room,noise,snr_db,stoi_target,snr_measured_db,method,stoi,param_hash\n";
  CHECK_THROWS_AS(report(empty), Error);
  std::ofstream(empty / "records.csv") << "garbage\n";
  CHECK_THROWS_AS(report(empty), Error);
}

TEST_CASE("records csv quotes awkward names")
{
  RunRecord r;
  r.utterance = "a,\"b\"";
  r.room = "room";
  r.noise = "noise";
  r.method = "unp";
  r.scores = {0.5, std::nullopt};
  r.param_hash = "h";
  const fs::path p = fs::temp_directory_path() / "nrse_quoted.csv";
  {
    std::ofstream out(p);
    write_records_csv(out, {r}, {"stoi", "x"});
  }
  const RecordTable t = read_records_csv(p);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].utterance == "a,\"b\"");
  CHECK(t.records[0].scores[0] == 0.5);
  CHECK_FALSE(t.records[0].scores[1]);
}
