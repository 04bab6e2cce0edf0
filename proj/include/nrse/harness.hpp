// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrse/hnh.hpp"
#include "nrse/mask.hpp"
#include "nrse/nnese.hpp"
#include "nrse/omlsa.hpp"

namespace nrse::harness {

namespace fs = std::filesystem;

// Bad configuration; the CLI maps it to exit code 2.
class ConfigError : public Error
{
public:
  using Error::Error;
};

inline const std::vector<std::string> kMethods{"unp", "hnh", "irmn", "irmo"};
inline const std::vector<std::string> kBuiltinMetrics{"stoi", "asii_st", "srmr"};

struct ExternalMetric
{
  std::string name;
  std::string command;
  double timeout_s = 60.0;
};

struct IrmParams
{
  Index bands = 21;
  double theta_db = -6.0;
  double early_ms = 50.0;
  double frame_ms = 32.0;
  double overlap = 0.5;
  WindowKind window = WindowKind::Hamming;

  mask::OracleConfig oracle(int sample_rate) const;
};

struct MethodParams
{
  hnh::Params hnh;
  IrmParams irm;
  nnese::DateConfig nnese;
  omlsa::LsaConfig omlsa;
};

struct Scenario
{
  fs::path clean_dir;
  fs::path rir_path;   // a WAV file or a directory of them (one room each)
  fs::path noise_path; // same
  fs::path output_dir;
  std::vector<double> snr_grid;
  std::vector<double> stoi_targets;
  std::vector<std::string> methods{"unp", "hnh", "irmn", "irmo"};
  std::uint64_t seed = 0;
  Index max_utterances = 0; // 0 keeps all
  Index calibration_utterances = 10;
  double stoi_tolerance = 0.005;
  int workers = 1;
  bool save_audio = true;
  std::vector<ExternalMetric> external;
  MethodParams params;

  // Structural checks only; paths are checked when the run starts.
  void validate() const;
  std::vector<std::string> metric_names() const;
};

nlohmann::json to_json(const Scenario &s);
Scenario scenario_from_json(const nlohmann::json &j);
Scenario load_scenario(const fs::path &path);

// FNV-1a over the canonical JSON, without output_dir and workers.
std::string param_hash(const Scenario &s);

// Reverberant speech plus noise at snr_db against the reverberant signal.
struct Degraded
{
  SampledSignal reverberant;
  SampledSignal mixture;
};
Degraded degrade(const SampledSignal &clean, const SampledSignal &rir, const SampledSignal &noise, double snr_db,
                 Index noise_offset = 0);

SampledSignal enhance(const std::string &method, const SampledSignal &mixture, const SampledSignal &clean,
                      const SampledSignal &rir, const MethodParams &params, std::uint64_t seed);

struct Calibration
{
  double target = 0.0;
  double snr_db = 0.0;
  double achieved = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false; // target outside the STOI range over [-20, 20] dB
};

// Bisection on mean STOI over the given utterances; targets outside (0, 1) throw.
Calibration calibrate_snr_for_stoi(const std::vector<SampledSignal> &clean, const SampledSignal &rir,
                                   const SampledSignal &noise, double stoi_target, double tol = 0.005,
                                   int max_iter = 20, std::uint64_t seed = 0);

struct RunRecord
{
  std::string utterance;
  std::string room;
  std::string noise;
  double snr_db = 0.0; // nominal
  std::optional<double> stoi_target;
  double snr_measured_db = 0.0;
  std::string method;
  std::vector<std::optional<double>> scores; // one per Scenario::metric_names()
  std::string param_hash;
};

struct RunResult
{
  std::vector<RunRecord> records;
  std::vector<std::string> metric_names;
  std::vector<Calibration> calibrations;
  Index jobs = 0;
  Index failed_jobs = 0;
  fs::path dir;

  // 0 ok, 1 when more than 10% of the jobs failed.
  int exit_code() const;
};

// Writes config.json, records.csv, tables.csv, tables.json, run_log.jsonl and
// (optionally) enhanced audio under output_dir.
RunResult run_scenario(const Scenario &s, std::ostream *progress = nullptr);

void write_records_csv(std::ostream &os, const std::vector<RunRecord> &records,
                       const std::vector<std::string> &metric_names);

struct RecordTable
{
  std::vector<std::string> metric_names;
  std::vector<RunRecord> records;
};
RecordTable read_records_csv(const fs::path &path);

struct MethodSummary
{
  std::string method;
  Index count = 0;
  std::vector<std::optional<double>> mean;  // per metric
  std::vector<std::optional<double>> delta; // mean - unp mean
};

struct Report
{
  std::vector<std::string> metric_names;
  std::vector<MethodSummary> methods;
};

Report summarize(const RecordTable &table);

// Reads run_dir/records.csv; writes report.md, report.csv and box_<metric>.dat.
Report report(const fs::path &run_dir);
void write_report_markdown(std::ostream &os, const Report &r);

} // namespace nrse::harness
