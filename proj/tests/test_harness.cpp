#include "leap/harness/corpus.hpp"
#include "leap/harness/metrics.hpp"
#include "leap/harness/sweep.hpp"

#include "leap/decoding.hpp"
#include "leap/error.hpp"
#include "leap/splitmix.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdio>

using namespace leap;
using namespace leap::testutil;

namespace {

DecodeTrace constant_trace(int steps, long forward_len, int events_per_step) {
  DecodeTrace trace;
  int pos = 0;
  for (int s = 1; s <= steps; ++s) {
    StepRecord rec;
    rec.step = s;
    rec.forward_len = forward_len;
    for (int e = 0; e < events_per_step; ++e)
      rec.events.push_back({pos++, 1, 0.9, Mechanism::threshold});
    rec.snapshots.push_back({pos - 1, 1, 0.9});
    trace.steps.push_back(rec);
  }
  return trace;
}

}  // namespace

TEST_CASE("metrics arithmetic: tokens per forward and total forward tokens") {
  // 64 tokens in 12 steps.
  DecodeTrace trace = constant_trace(12, 70, 0);
  int pos = 0;
  for (auto& step : trace.steps)
    for (int e = 0; e < (pos < 48 ? 6 : 4); ++e, ++pos)
      step.events.push_back({pos, 1, 0.95, Mechanism::threshold});
  // Steps 1..8 get 6 events, remaining 4 steps get 4: 48 + 16 = 64.
  const auto report = compute_metrics(trace);
  CHECK(report.decoded_tokens == 64);
  CHECK(report.tpf == doctest::Approx(64.0 / 12.0));
  CHECK(report.tfops == 12 * 70);
}

TEST_CASE("one-per-step trace over a length-70 sequence costs 64*70") {
  const auto trace = constant_trace(64, 70, 1);
  const auto report = compute_metrics(trace);
  CHECK(report.tfops == 4480);
  CHECK(report.tpf == doctest::Approx(1.0));
}

TEST_CASE("recomputing metrics from the serialized trace is identical") {
  const auto w = seeded_weights(3, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.gen_len = 8;
  cfg.block_size = 4;
  cfg.tau = 0.3;
  cfg.seed = 5;
  const auto run = run_decode(w, std::vector<Token>{2}, cfg);
  const auto direct = compute_metrics(run.trace);
  const auto reloaded = compute_metrics(trace_from_jsonl(trace_to_jsonl(run.trace)));
  CHECK(direct.tfops == reloaded.tfops);
  CHECK(direct.steps == reloaded.steps);
  CHECK(direct.decoded_tokens == reloaded.decoded_tokens);
  CHECK(direct.step_forward_lens == reloaded.step_forward_lens);
}

TEST_CASE("metrics against a baseline produce ratios and catch mismatches") {
  const auto fast = constant_trace(16, 70, 4);
  const auto slow = constant_trace(64, 70, 1);
  const auto report = compute_metrics(fast, &slow);
  CHECK(report.speedup_steps == doctest::Approx(4.0));
  CHECK(report.norm_tfops == doctest::Approx(16.0 / 64.0));

  const auto short_trace = constant_trace(10, 70, 1);
  CHECK_THROWS_AS(compute_metrics(fast, &short_trace), DataError);
}

TEST_CASE("metrics CSV carries empty cells for unknown fields") {
  const auto report = compute_metrics(constant_trace(4, 10, 1));
  const std::string csv = metrics_to_csv(report);
  CHECK(csv.find("strategy,steps,decoded_tokens,tpf,tfops") == 0);
  CHECK(csv.find(",,") != std::string::npos);  // unknown wall/baseline cells
  const std::string series = step_series_to_csv(report);
  CHECK(series.find("step,forward_len\n1,10\n") == 0);
}

TEST_CASE("baseline strategy yields TPF exactly 1") {
  SplitMix64 rng(2);
  const auto spec = random_chain(rng, 4);
  DecodeConfig cfg;
  cfg.strategy = Strategy::baseline;
  cfg.block_size = 8;
  cfg.seed = 3;
  const auto report = evaluate_corpus(spec, 5, 16, 0.0, cfg);
  CHECK(report.mean_tpf == doctest::Approx(1.0));
}

TEST_CASE("corpus evaluation with nothing masked recovers trivially") {
  SplitMix64 rng(4);
  const auto spec = random_chain(rng, 4);
  DecodeConfig cfg;
  cfg.seed = 9;
  cfg.block_size = 8;
  const auto report = evaluate_corpus(spec, 4, 16, 1.0, cfg);
  CHECK(report.recovery == doctest::Approx(1.0));
  CHECK(report.exact_match == doctest::Approx(1.0));
  CHECK(report.mean_steps == doctest::Approx(0.0));
}

TEST_CASE("an absorbing chain is recovered perfectly by every strategy") {
  MarkovSpec spec;
  spec.vocab = 2;
  spec.initial = VecD(2);
  spec.initial << 1.0, 0.0;
  spec.transition = MatD(2, 2);
  spec.transition << 1.0, 0.0, 0.0, 1.0;
  for (Strategy strategy :
       {Strategy::baseline, Strategy::cbpd, Strategy::leap}) {
    DecodeConfig cfg;
    cfg.strategy = strategy;
    cfg.block_size = 8;
    cfg.seed = 5;
    const auto report = evaluate_corpus(spec, 3, 16, 0.0, cfg);
    CHECK(report.recovery == doctest::Approx(1.0));
    CHECK(report.exact_match == doctest::Approx(1.0));
  }
}

TEST_CASE("corpus files round-trip") {
  SplitMix64 rng(6);
  const auto spec = random_chain(rng, 5);
  const auto corpus = sample_corpus(spec, 4, 12, 77);
  CHECK(corpus.size() == 4);
  const std::string path = "build_test_corpus.jsonl";
  save_corpus(corpus, path);
  const auto loaded = load_corpus(path);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].id == corpus[i].id);
    CHECK(loaded[i].tokens == corpus[i].tokens);
  }
  std::remove(path.c_str());
}

TEST_CASE("sweep produces the documented row counts") {
  SplitMix64 rng(8);
  const auto spec = random_chain(rng, 4);
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.block_size = 8;
  cfg.seed = 13;

  const auto tau_rows =
      sweep(SweepParam::tau, 0.55, 0.80, 0.05, spec, 2, 8, 0.0, cfg);
  CHECK(tau_rows.size() == 6);
  const auto eta_rows =
      sweep(SweepParam::eta, 0.10, 0.50, 0.05, spec, 2, 8, 0.0, cfg);
  CHECK(eta_rows.size() == 9);
  const auto one =
      sweep(SweepParam::phi, 0.9, 0.9, 0.05, spec, 2, 8, 0.0, cfg);
  CHECK(one.size() == 1);

  const std::string csv = sweep_to_csv(SweepParam::tau, tau_rows);
  CHECK(csv.find("tau,recovery,exact_match,mean_steps,mean_tpf,norm_tfops") ==
        0);
  CHECK_THROWS_AS(sweep(SweepParam::tau, 0.8, 0.5, 0.05, spec, 2, 8, 0.0, cfg),
                  DataError);
}

TEST_CASE("corpus reports are deterministic for a fixed seed") {
  SplitMix64 rng(10);
  const auto spec = random_chain(rng, 4);
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.block_size = 8;
  cfg.seed = 21;
  const auto a = evaluate_corpus(spec, 3, 16, 0.3, cfg);
  const auto b = evaluate_corpus(spec, 3, 16, 0.3, cfg);
  CHECK(corpus_report_to_csv(a).substr(0, corpus_report_to_csv(a).rfind(','))
        == corpus_report_to_csv(b).substr(0, corpus_report_to_csv(b).rfind(',')));
  CHECK(a.strategy == "leap-exact");
}
