// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "nrse/corpus.hpp"
#include "nrse/harness.hpp"
#include "nrse/ins.hpp"
#include "nrse/metrics.hpp"
#include "nrse/mixing.hpp"

using namespace nrse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

harness::MethodParams method_params(const std::string &config)
{
  return config.empty() ? harness::MethodParams{} : harness::load_scenario(config).params;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Noisy-reverberant speech enhancement toolkit"};
  app.require_subcommand(1);

  // synth
  auto *synth = app.add_subcommand("synth", "Write the synthetic desk corpus");
  std::string synth_out = "data";
  corpus::SynthSpec spec;
  synth->add_option("-o,--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--utterances", spec.utterances)->capture_default_str();
  synth->add_option("--seconds", spec.seconds)->capture_default_str();
  synth->add_option("--rate", spec.sample_rate)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--t60", spec.t60s, "Reverberation times in seconds")->capture_default_str();

  // corrupt
  auto *corrupt = app.add_subcommand("corrupt", "Convolve clean speech with a RIR and add noise at an SNR");
  std::string c_clean, c_rir, c_noise, c_out, c_rev;
  double c_snr = 0.0;
  Index c_offset = 0;
  corrupt->add_option("--clean", c_clean)->required()->check(CLI::ExistingFile);
  corrupt->add_option("--rir", c_rir)->required()->check(CLI::ExistingFile);
  corrupt->add_option("--noise", c_noise)->required()->check(CLI::ExistingFile);
  corrupt->add_option("--snr", c_snr, "SNR in dB against the reverberant speech")->required();
  corrupt->add_option("--noise-offset", c_offset)->capture_default_str();
  corrupt->add_option("-o,--out", c_out)->required();
  corrupt->add_option("--reverberant-out", c_rev, "Also write the noise-free reverberant signal");

  // enhance
  auto *enh = app.add_subcommand("enhance", "Run one enhancement method on a WAV file");
  std::string e_method, e_in, e_out, e_clean, e_rir, e_config, e_trace;
  std::uint64_t e_seed = 0;
  enh->add_option("-m,--method", e_method)->required()->check(CLI::IsMember(harness::kMethods));
  enh->add_option("-i,--in", e_in)->required()->check(CLI::ExistingFile);
  enh->add_option("-o,--out", e_out)->required();
  enh->add_option("--clean", e_clean, "Clean reference (oracle mask for irmn/irmo)")->check(CLI::ExistingFile);
  enh->add_option("--rir", e_rir, "Room impulse response (oracle mask for irmn/irmo)")->check(CLI::ExistingFile);
  enh->add_option("-c,--config", e_config, "Scenario config supplying method parameters")->check(CLI::ExistingFile);
  enh->add_option("--seed", e_seed)->capture_default_str();
  enh->add_option("--trace", e_trace, "Per-frame CSV trace (hnh only)");

  // evaluate
  auto *eval = app.add_subcommand("evaluate", "Score a processed signal against its clean reference");
  std::string v_clean, v_proc;
  std::vector<std::string> v_external;
  eval->add_option("--clean", v_clean)->required()->check(CLI::ExistingFile);
  eval->add_option("--processed", v_proc)->required()->check(CLI::ExistingFile);
  eval->add_option("--external", v_external, "name=command; command receives <clean> <processed>");

  // run
  auto *run = app.add_subcommand("run", "Run a scenario config");
  std::string r_config, r_output;
  int r_workers = 0;
  run->add_option("-c,--config", r_config)->required();
  run->add_option("-o,--output", r_output, "Override scenario.output_dir");
  run->add_option("-j,--workers", r_workers, "Override scenario.workers");
  bool r_quiet = false;
  run->add_flag("-q,--quiet", r_quiet);

  // report
  auto *rep = app.add_subcommand("report", "Summarize a run directory");
  std::string p_dir;
  rep->add_option("run_dir", p_dir)->required();

  // ins
  auto *ins = app.add_subcommand("ins", "Index of non-stationarity profile as CSV");
  std::string i_in;
  InsConfig i_cfg;
  ins->add_option("-i,--in", i_in)->required()->check(CLI::ExistingFile);
  ins->add_option("--surrogates", i_cfg.n_surrogates)->capture_default_str();
  ins->add_option("--scales", i_cfg.scales)->capture_default_str();
  ins->add_option("--seed", i_cfg.seed)->capture_default_str();

  // config
  auto *cfg = app.add_subcommand("config", "Print a complete default scenario config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      corpus::write_synthetic_corpus(synth_out, spec);
      std::cout << "wrote " << spec.utterances << " utterances, " << spec.t60s.size() << " RIRs, 2 noises to "
                << synth_out << '\n';
    } else if (corrupt->parsed()) {
      const SampledSignal clean = load_wav(c_clean);
      const int rate = clean.sample_rate();
      const auto d = harness::degrade(clean, load_wav(c_rir, {rate}), load_wav(c_noise, {rate}), c_snr, c_offset);
      write_wav(c_out, d.mixture, WavEncoding::Float32);
      if (!c_rev.empty()) { write_wav(c_rev, d.reverberant, WavEncoding::Float32); }
    } else if (enh->parsed()) {
      const SampledSignal x = load_wav(e_in);
      const harness::MethodParams params = method_params(e_config);
      SampledSignal clean, rir;
      if (e_method == "irmn" || e_method == "irmo") {
        if (e_clean.empty() || e_rir.empty()) { throw harness::ConfigError(e_method + " needs --clean and --rir"); }
        clean = load_wav(e_clean, {x.sample_rate()});
        rir = load_wav(e_rir, {x.sample_rate()});
      }
      SampledSignal y;
      if (e_method == "hnh" && !e_trace.empty()) {
        hnh::Params p = params.hnh;
        p.seed = e_seed;
        std::vector<hnh::FrameTrace> trace;
        y = hnh::enhance(x, p, &trace);
        std::ofstream t(e_trace);
        hnh::write_trace_csv(t, trace);
      } else {
        y = harness::enhance(e_method, x, clean, rir, params, e_seed);
      }
      write_wav(e_out, y, WavEncoding::Float32);
    } else if (eval->parsed()) {
      const SampledSignal clean = load_wav(v_clean);
      const SampledSignal proc = load_wav(v_proc, {clean.sample_rate()});
      json out = {{"stoi", metrics::stoi(clean, proc)},
                  {"asii_st", metrics::asii_st(clean, proc)},
                  {"srmr", metrics::srmr(proc)}};
      for (const auto &spec_str : v_external) {
        const auto eq = spec_str.find('=');
        if (eq == std::string::npos) { throw harness::ConfigError("--external expects name=command"); }
        const auto r = metrics::external_metric(spec_str.substr(eq + 1), v_clean, v_proc);
        if (!r.value) { std::cerr << "warning: " << spec_str.substr(0, eq) << ": " << r.error << '\n'; }
        out[spec_str.substr(0, eq)] = r.value ? json(*r.value) : json(nullptr);
      }
      std::cout << out.dump(2) << '\n';
    } else if (run->parsed()) {
      harness::Scenario s = harness::load_scenario(r_config);
      if (!r_output.empty()) { s.output_dir = r_output; }
      if (r_workers > 0) { s.workers = r_workers; }
      const harness::RunResult res = harness::run_scenario(s, r_quiet ? nullptr : &std::cerr);
      std::cerr << res.records.size() << " records, " << res.failed_jobs << '/' << res.jobs << " failed jobs, "
                << "output in " << res.dir.string() << '\n';
      return res.exit_code();
    } else if (rep->parsed()) {
      harness::write_report_markdown(std::cout, harness::report(p_dir));
    } else if (ins->parsed()) {
      write_ins_csv(std::cout, compute_ins(load_wav(i_in), i_cfg));
    } else if (cfg->parsed()) {
      harness::Scenario s;
      s.clean_dir = "data/speech";
      s.rir_path = "data/rir";
      s.noise_path = "data/noise";
      s.output_dir = "runs/default";
      s.snr_grid = {0.0, -5.0};
      s.seed = 2026;
      std::cout << harness::to_json(s).dump(2) << '\n';
    }
  } catch (const harness::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
