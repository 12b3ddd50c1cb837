// Command-line front end: weight generation, corpus sampling, decoding runs,
// metrics, statistics, detector evaluation, and threshold sweeps.

#include "leap/analysis.hpp"
#include "leap/decoding.hpp"
#include "leap/error.hpp"
#include "leap/harness/corpus.hpp"
#include "leap/harness/metrics.hpp"
#include "leap/harness/sweep.hpp"
#include "leap/markov.hpp"
#include "leap/splitmix.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace leap;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBound = 3;

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << content;
}

std::string derive_sibling(const std::string& path, const std::string& tag) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string backend;
  std::string weights_path;
  std::string spec_path;
  std::string config_path;
  std::string trace_path;
  std::string strategy, mode;
  double phi = -1, tau = -1, eta = -1, alpha = -1;
  int block_size = -1, gen_len = -1;
  std::optional<std::uint64_t> seed;
  std::optional<bool> union_cbpd;
};

int cmd_run(const RunOptions& opt) {
  DecodeConfig cfg;
  std::optional<std::uint64_t> seed;
  double alpha = 0.0;
  bool alpha_set = false;

  if (!opt.config_path.empty()) {
    const KeyValueFile file = load_key_value_file(opt.config_path);
    seed = apply_config_file(cfg, file);
    if (file.has("alpha")) {
      alpha = file.get_double("alpha");
      alpha_set = true;
    }
  }
  if (!opt.strategy.empty()) cfg.strategy = strategy_from_string(opt.strategy);
  if (!opt.mode.empty())
    cfg.visibility_mode = visibility_mode_from_string(opt.mode);
  if (opt.phi >= 0) cfg.phi = opt.phi;
  if (opt.tau >= 0) cfg.tau = opt.tau;
  if (opt.eta >= 0) cfg.eta = opt.eta;
  if (opt.block_size >= 0) cfg.block_size = opt.block_size;
  if (opt.gen_len >= 0) cfg.gen_len = opt.gen_len;
  if (opt.union_cbpd) cfg.union_cbpd = *opt.union_cbpd;
  if (opt.seed) seed = opt.seed;
  if (opt.alpha >= 0) {
    alpha = opt.alpha;
    alpha_set = true;
  }
  if (!seed) throw UsageError("--seed is required (flag or config file)");
  cfg.seed = *seed;
  cfg.validate();

  DecodeRun run;
  if (opt.backend == "tiny") {
    if (opt.weights_path.empty())
      throw UsageError("--weights is required for the tiny backend");
    if (alpha_set)
      std::cerr << "note: --alpha is ignored by the tiny backend\n";
    const DenoiserWeights weights = load_weights(opt.weights_path);
    run = run_decode(weights, std::vector<Token>{}, cfg);
  } else if (opt.backend == "markov") {
    if (opt.spec_path.empty())
      throw UsageError("--spec is required for the markov backend");
    const MarkovSpec spec = load_markov_spec(opt.spec_path);
    const Vocab vocab = spec.decode_vocab();
    const auto x0 =
        sample_sequence(spec, cfg.gen_len, derive_seed(cfg.seed, 0));
    const auto xt = corrupt(x0, alpha, vocab.mask_id, derive_seed(cfg.seed, 1));
    long masked = 0;
    for (Token t : xt)
      if (t == vocab.mask_id) ++masked;
    if (masked == 0) {
      std::cout << "nothing masked at alpha=" << alpha
                << "; writing an empty trace\n";
      write_file(opt.trace_path, "");
      return 0;
    }
    run = run_decode(spec, state_from_tokens(xt, 0, cfg.block_size, vocab),
                     cfg);
  } else {
    throw UsageError("--backend must be tiny or markov");
  }

  save_trace(run.trace, opt.trace_path);
  const MetricsReport report = compute_metrics(run.trace);
  std::cout << "strategy=" << run.trace.meta.strategy
            << " steps=" << report.steps << " tokens=" << report.decoded_tokens
            << " tpf=" << report.tpf << " tfops=" << report.tfops
            << " wall_s=" << report.wall_seconds << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(const std::string& traces_dir, const std::string& targets_dir,
              const std::string& out_path, std::string out_cdf_path) {
  std::vector<std::string> names;
  if (!fs::is_directory(traces_dir))
    throw DataError("not a directory: " + traces_dir);
  for (const auto& entry : fs::directory_iterator(traces_dir))
    if (entry.path().extension() == ".jsonl")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw DataError("no .jsonl traces in " + traces_dir);

  std::vector<DecodeTrace> traces, target_traces;
  traces.reserve(names.size());
  target_traces.reserve(names.size());
  for (const std::string& name : names) {
    const fs::path target_path = fs::path(targets_dir) / name;
    if (!fs::exists(target_path))
      throw DataError("no matching target trace for " + name);
    traces.push_back(load_trace((fs::path(traces_dir) / name).string()));
    target_traces.push_back(load_trace(target_path.string()));
  }

  std::vector<ConvergenceTarget> targets;
  targets.reserve(target_traces.size());
  for (const auto& t : target_traces)
    targets.push_back(convergence_target_from_trace(t));

  std::vector<const DecodeTrace*> trace_ptrs;
  std::vector<const ConvergenceTarget*> target_ptrs;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    trace_ptrs.push_back(&traces[i]);
    target_ptrs.push_back(&targets[i]);
  }

  const BinnedStats binned = early_stats(trace_ptrs, target_ptrs);
  const CdfStats cdf = prev_conf_cdf(trace_ptrs, target_ptrs);
  write_file(out_path, binned_stats_to_csv(binned));
  if (out_cdf_path.empty()) out_cdf_path = derive_sibling(out_path, "_cdf");
  write_file(out_cdf_path, cdf_stats_to_csv(cdf));

  std::cout << "traces=" << traces.size() << " included=" << cdf.included
            << " excluded_no_prior=" << cdf.excluded_no_prior
            << " excluded_top1_mismatch=" << cdf.excluded_top1_mismatch
            << '\n';
  if (cdf.included > 0)
    std::cout << "confidence at cumulative 0.10: " << cdf.conf_at(0.10)
              << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(const std::string& weights_path, const std::string& corpus_path,
               const std::string& config_path, const std::string& out_path) {
  const DenoiserWeights weights = load_weights(weights_path);
  const auto corpus = load_corpus(corpus_path);
  DecodeConfig cfg;
  const KeyValueFile file = load_key_value_file(config_path);
  const auto seed = apply_config_file(cfg, file);
  if (!seed) throw UsageError("config file must provide a seed");
  cfg.seed = *seed;
  cfg.strategy = Strategy::leap;
  cfg.validate();

  std::vector<std::vector<Token>> prompts;
  prompts.reserve(corpus.size());
  for (const CorpusItem& item : corpus) prompts.push_back(item.tokens);

  const DetectorReport report = detector_quality(weights, prompts, cfg);
  write_file(out_path, detector_report_to_csv(report));
  std::cout << "steps=" << report.steps.size() << " tp=" << report.tp
            << " fp=" << report.fp << " fn=" << report.fn;
  if (auto p = report.precision()) std::cout << " precision=" << *p;
  if (auto r = report.recall()) std::cout << " recall=" << *r;
  std::cout << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& param_name, const std::string& range,
              const std::string& config_path, const std::string& out_path) {
  const SweepParam param = sweep_param_from_string(param_name);
  double lo = 0, hi = 0, step = 0;
  if (std::sscanf(range.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
    throw UsageError("--range must be LO:HI:STEP");

  const KeyValueFile file = load_key_value_file(config_path);
  DecodeConfig cfg;
  const auto seed = apply_config_file(cfg, file);
  if (!seed) throw UsageError("config file must provide a seed");
  cfg.seed = *seed;
  const MarkovSpec spec = load_markov_spec(file.get_string("spec"));
  const int n = file.get_int("n");
  const int len = file.get_int("len");
  const double alpha = file.has("alpha") ? file.get_double("alpha") : 0.0;

  const auto rows = sweep(param, lo, hi, step, spec, n, len, alpha, cfg);
  write_file(out_path, sweep_to_csv(param, rows));
  std::cout << "rows=" << rows.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lookahead early-convergence decoding workbench"};
  app.require_subcommand(1);

  // gen-weights
  auto* gen =
      app.add_subcommand("gen-weights", "Write deterministically seeded weights");
  std::uint64_t gw_seed = 0;
  ModelDims gw_dims;
  std::string gw_out;
  gen->add_option("--seed", gw_seed, "")->required();
  gen->add_option("--d-model", gw_dims.d_model, "")->required();
  gen->add_option("--heads", gw_dims.n_heads, "")->required();
  gen->add_option("--layers", gw_dims.n_layers, "")->required();
  gen->add_option("--ffn", gw_dims.d_ffn, "")->required();
  gen->add_option("--vocab", gw_dims.vocab, "")->required();
  gen->add_option("--max-pos", gw_dims.max_pos, "")->required();
  gen->add_option("--out", gw_out, "")->required();

  // sample-corpus
  auto* sc = app.add_subcommand("sample-corpus", "Sample chain sequences");
  std::string sc_spec, sc_out;
  int sc_n = 0, sc_len = 0;
  std::uint64_t sc_seed = 0;
  sc->add_option("--spec", sc_spec, "")->required();
  sc->add_option("--n", sc_n, "")->required();
  sc->add_option("--len", sc_len, "")->required();
  auto* sc_seed_opt = sc->add_option("--seed", sc_seed, "");
  sc->add_option("--out", sc_out, "")->required();

  // run
  auto* run = app.add_subcommand("run", "Decode one sequence, write a trace");
  RunOptions ro;
  std::uint64_t run_seed = 0;
  bool run_union = false;
  run->add_option("--backend", ro.backend, "")->required();
  run->add_option("--weights", ro.weights_path, "");
  run->add_option("--spec", ro.spec_path, "");
  run->add_option("--config", ro.config_path, "");
  run->add_option("--strategy", ro.strategy, "");
  run->add_option("--phi", ro.phi, "");
  run->add_option("--tau", ro.tau, "");
  run->add_option("--eta", ro.eta, "");
  run->add_option("--block-size", ro.block_size, "");
  run->add_option("--gen-len", ro.gen_len, "");
  run->add_option("--alpha", ro.alpha, "");
  auto* run_seed_opt = run->add_option("--seed", run_seed, "");
  run->add_option("--mode", ro.mode, "");
  auto* run_union_opt = run->add_flag("--union-cbpd", run_union, "");
  run->add_option("--trace", ro.trace_path, "")->required();

  // metrics
  auto* met = app.add_subcommand("metrics", "Recompute metrics from a trace");
  std::string met_trace, met_baseline, met_out, met_strategy;
  met->add_option("--trace", met_trace, "")->required();
  met->add_option("--baseline", met_baseline, "");
  met->add_option("--out", met_out, "")->required();
  met->add_option("--strategy", met_strategy, "label for the report");

  // stats
  auto* st = app.add_subcommand(
      "stats", "Early-correctness and prior-confidence statistics");
  std::string st_traces, st_targets, st_out, st_out_cdf;
  st->add_option("--traces", st_traces, "")->required();
  st->add_option("--targets", st_targets, "")->required();
  st->add_option("--out", st_out, "")->required();
  st->add_option("--out-cdf", st_out_cdf, "");

  // oracle
  auto* orc = app.add_subcommand(
      "oracle", "Detector precision/recall against the invariance oracle");
  std::string orc_weights, orc_corpus, orc_config, orc_out;
  orc->add_option("--weights", orc_weights, "")->required();
  orc->add_option("--corpus", orc_corpus, "")->required();
  orc->add_option("--config", orc_config, "")->required();
  orc->add_option("--out", orc_out, "")->required();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Grid over tau, eta, or phi");
  std::string sw_param, sw_range, sw_config, sw_out;
  sw->add_option("--param", sw_param, "")->required();
  sw->add_option("--range", sw_range, "LO:HI:STEP")->required();
  sw->add_option("--config", sw_config, "")->required();
  sw->add_option("--out", sw_out, "")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      gw_dims.validate();
      save_weights(seeded_weights(gw_seed, gw_dims), gw_out);
      std::cout << "wrote " << gw_out << " (" << fs::file_size(gw_out)
                << " bytes)\n";
      return 0;
    }
    if (sc->parsed()) {
      if (sc_seed_opt->count() == 0)
        throw UsageError("--seed is required for sample-corpus");
      save_corpus(
          sample_corpus(load_markov_spec(sc_spec), sc_n, sc_len, sc_seed),
          sc_out);
      std::cout << "wrote " << sc_out << '\n';
      return 0;
    }
    if (run->parsed()) {
      if (run_seed_opt->count() > 0) ro.seed = run_seed;
      if (run_union_opt->count() > 0) ro.union_cbpd = run_union;
      return cmd_run(ro);
    }
    if (met->parsed()) {
      const DecodeTrace trace = load_trace(met_trace);
      DecodeTrace baseline;
      const DecodeTrace* baseline_ptr = nullptr;
      if (!met_baseline.empty()) {
        baseline = load_trace(met_baseline);
        baseline_ptr = &baseline;
      }
      MetricsReport report = compute_metrics(trace, baseline_ptr);
      if (!met_strategy.empty()) report.strategy = met_strategy;
      write_file(met_out, metrics_to_csv(report));
      write_file(derive_sibling(met_out, "_steps"), step_series_to_csv(report));
      std::cout << metrics_to_csv(report);
      return 0;
    }
    if (st->parsed())
      return cmd_stats(st_traces, st_targets, st_out, st_out_cdf);
    if (orc->parsed())
      return cmd_oracle(orc_weights, orc_corpus, orc_config, orc_out);
    if (sw->parsed()) return cmd_sweep(sw_param, sw_range, sw_config, sw_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BoundError& e) {
    std::cerr << "bound error: " << e.what() << '\n';
    return kExitBound;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
