#include "leap/decoding.hpp"

#include "leap/error.hpp"
#include "leap/splitmix.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace leap;
using namespace leap::testutil;

namespace {

VecD dist_from(std::initializer_list<double> vals) {
  VecD d(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) d(i++) = v;
  return d;
}

/// Distribution over `size` tokens putting `conf` on `top` and spreading the
/// rest; the mask id (last) gets nothing.
VecD peaked(int size, Token top, double conf) {
  VecD d = VecD::Constant(size, (1.0 - conf) / static_cast<double>(size - 2));
  d(top) = conf;
  d(size - 1) = 0.0;
  return d;
}

const Vocab kVocab{8, 7, {}};

}  // namespace

TEST_CASE("greedy returns the argmax with low-id tie-breaking") {
  CHECK(greedy(dist_from({0.1, 0.7, 0.2})) == std::pair<Token, double>{1, 0.7});
  CHECK(greedy(dist_from({0.5, 0.5})) == std::pair<Token, double>{0, 0.5});
  CHECK(greedy(dist_from({0.0, 0.0, 0.0, 1.0})) ==
        std::pair<Token, double>{3, 1.0});
}

TEST_CASE("greedy_decode never selects the mask token") {
  const auto pred = greedy_decode(dist_from({0.1, 0.3, 0.6}), 2);
  CHECK(pred.token == 1);
  CHECK(pred.conf == doctest::Approx(0.3));
}

TEST_CASE("cbpd decodes every position strictly above phi") {
  SequenceState st = new_state({}, 4, 4, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 1, 0.95)},
                            {1, peaked(8, 2, 0.91)},
                            {2, peaked(8, 3, 0.40)},
                            {3, peaked(8, 4, 0.55)}};
  const auto set = step_cbpd(st, dists, 0.9, kVocab);
  REQUIRE(set.events.size() == 2);
  for (const auto& e : set.events) {
    CHECK((e.pos == 0 || e.pos == 1));
    CHECK(e.mech == Mechanism::threshold);
  }
}

TEST_CASE("cbpd falls back to the single global argmax") {
  SequenceState st = new_state({}, 3, 3, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 1, 0.8)},
                            {1, peaked(8, 2, 0.88)},
                            {2, peaked(8, 3, 0.6)}};
  const auto set = step_cbpd(st, dists, 0.9, kVocab);
  REQUIRE(set.events.size() == 1);
  CHECK(set.events[0].pos == 1);
  CHECK(set.events[0].token == 2);
  CHECK(set.events[0].mech == Mechanism::fallback);
}

TEST_CASE("cbpd fallback ties break to the smaller position") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 1, 0.5)}, {1, peaked(8, 2, 0.5)}};
  const auto set = step_cbpd(st, dists, 0.9, kVocab);
  REQUIRE(set.events.size() == 1);
  CHECK(set.events[0].pos == 0);
}

TEST_CASE("cbpd with one confident position emits one threshold event") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  apply_decodes(st, {{1, 3}}, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 5, 0.99)}};
  const auto set = step_cbpd(st, dists, 0.9, kVocab);
  REQUIRE(set.events.size() == 1);
  CHECK(set.events[0].mech == Mechanism::threshold);
  CHECK(set.events[0].token == 5);
}

TEST_CASE("cbpd rejects distributions not covering the active block") {
  SequenceState st = new_state({}, 4, 4, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 1, 0.9)}};
  CHECK_THROWS_AS(step_cbpd(st, dists, 0.9, kVocab), DataError);
}

TEST_CASE("baseline decodes exactly the most confident position") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  std::map<int, VecD> dists{{0, peaked(8, 1, 0.3)}, {1, peaked(8, 2, 0.6)}};
  const auto set = step_baseline(st, dists, kVocab);
  REQUIRE(set.events.size() == 1);
  CHECK(set.events[0].pos == 1);

  std::map<int, VecD> tie{{0, peaked(8, 1, 0.5)}, {1, peaked(8, 2, 0.5)}};
  const auto tied = step_baseline(st, tie, kVocab);
  CHECK(tied.events[0].pos == 0);
}

TEST_CASE("the lookahead rule gates consistency at tau inclusively") {
  DecodeConfig cfg;
  cfg.tau = 0.7;
  std::map<int, Prediction> orig{{2, {4, 0.75}}};
  SUBCASE("agreeing prediction above tau decodes by consistency") {
    std::map<int, Prediction> copy{{2, {4, 0.4}}};
    const auto set = leap_decode_set(orig, copy, cfg);
    REQUIRE(set.events.size() == 1);
    CHECK(set.events[0].mech == Mechanism::consistency);
    CHECK(set.events[0].token == 4);
  }
  SUBCASE("agreeing prediction below tau falls back") {
    orig.at(2).conf = 0.65;
    std::map<int, Prediction> copy{{2, {4, 0.4}}};
    const auto set = leap_decode_set(orig, copy, cfg);
    REQUIRE(set.events.size() == 1);
    CHECK(set.events[0].mech == Mechanism::fallback);
  }
  SUBCASE("boundary confidence equal to tau is included") {
    orig.at(2).conf = 0.7;
    std::map<int, Prediction> copy{{2, {4, 0.4}}};
    CHECK(leap_decode_set(orig, copy, cfg).events[0].mech ==
          Mechanism::consistency);
  }
  SUBCASE("disagreement excludes even at high confidence") {
    orig.at(2).conf = 0.85;
    std::map<int, Prediction> copy{{2, {5, 0.5}}};
    const auto set = leap_decode_set(orig, copy, cfg);
    CHECK(set.events[0].mech == Mechanism::fallback);

    DecodeConfig with_union = cfg;
    with_union.union_cbpd = true;
    with_union.phi = 0.8;
    const auto unioned = leap_decode_set(orig, copy, with_union);
    REQUIRE(unioned.events.size() == 1);
    CHECK(unioned.events[0].mech == Mechanism::threshold);
  }
}

TEST_CASE("baseline completes in exactly gen_len steps") {
  const auto w = seeded_weights(5, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::baseline;
  cfg.gen_len = 8;
  cfg.block_size = 4;
  cfg.seed = 1;
  const auto run = run_decode(w, std::vector<Token>{1, 2}, cfg);
  CHECK(run.trace.steps.size() == 8);
  CHECK(run.trace.total_events() == 8);
  for (const auto& step : run.trace.steps) {
    CHECK(step.events.size() == 1);
    CHECK(step.forward_len == 10);
  }
}

TEST_CASE("cbpd with phi = 1 degenerates to one fallback per step") {
  const auto w = seeded_weights(6, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::cbpd;
  cfg.phi = 1.0;
  cfg.gen_len = 8;
  cfg.block_size = 8;
  cfg.seed = 1;
  const auto run = run_decode(w, std::vector<Token>{3}, cfg);
  CHECK(run.trace.steps.size() == 8);
  for (const auto& step : run.trace.steps) {
    REQUIRE(step.events.size() == 1);
    CHECK(step.events[0].mech == Mechanism::fallback);
  }
}

TEST_CASE("identical runs serialize to identical trace bytes") {
  const auto w = seeded_weights(12, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.gen_len = 8;
  cfg.block_size = 4;
  cfg.tau = 0.3;
  cfg.seed = 9;
  const auto a = run_decode(w, std::vector<Token>{1, 2, 3}, cfg);
  const auto b = run_decode(w, std::vector<Token>{1, 2, 3}, cfg);
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
  CHECK(a.tokens == b.tokens);
}

TEST_CASE("all strategies respect progress, block order, and termination") {
  const auto w = seeded_weights(33, small_dims());
  SplitMix64 rng(4);
  for (Strategy strategy :
       {Strategy::baseline, Strategy::cbpd, Strategy::leap}) {
    for (int rep = 0; rep < 5; ++rep) {
      DecodeConfig cfg;
      cfg.strategy = strategy;
      cfg.gen_len = 12;
      cfg.block_size = 4;
      cfg.tau = 0.4;
      cfg.phi = 0.6;
      cfg.seed = static_cast<std::uint64_t>(rep);
      const auto prompt = random_tokens(rng, 3, 10);
      const auto run = run_decode(w, prompt, cfg);

      CHECK(run.trace.total_events() == cfg.gen_len);
      CHECK(run.trace.steps.size() <= static_cast<std::size_t>(cfg.gen_len));
      std::set<int> decoded;
      int frontier = 3;  // prompt length
      for (const auto& step : run.trace.steps) {
        CHECK(!step.events.empty());
        int min_pos = 1 << 20;
        for (const auto& e : step.events) {
          CHECK(decoded.insert(e.pos).second);  // pairwise distinct
          min_pos = std::min(min_pos, e.pos);
        }
        // No event may land beyond the block of the smallest still-masked
        // position.
        const int active_begin = 3 + ((frontier - 3) / 4) * 4;
        for (const auto& e : step.events) {
          CHECK(e.pos >= active_begin);
          CHECK(e.pos < active_begin + 4);
        }
        while (decoded.count(frontier)) ++frontier;
      }
      for (Token t : run.tokens) CHECK(t != 11);
    }
  }
}

TEST_CASE("lookahead boots each block with a plain pass") {
  const auto w = seeded_weights(21, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.gen_len = 8;
  cfg.block_size = 4;
  cfg.tau = 0.2;  // loose, so consistency events actually appear
  cfg.seed = 2;
  std::vector<bool> lookahead_by_step;
  std::vector<int> block_begins;
  const StepObserver obs = [&](const StepInfo& info) {
    lookahead_by_step.push_back(info.lookahead);
    block_begins.push_back(info.block.begin);
  };
  run_decode(w, std::vector<Token>{}, cfg, obs);
  bool any_lookahead = false;
  for (std::size_t i = 0; i < block_begins.size(); ++i) {
    const bool new_block = i == 0 || block_begins[i] != block_begins[i - 1];
    if (new_block) CHECK_FALSE(lookahead_by_step[i]);
    any_lookahead = any_lookahead || lookahead_by_step[i];
  }
  CHECK(any_lookahead);
}

TEST_CASE("superposed forward lengths respect the pruning bound") {
  const auto w = seeded_weights(55, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::leap;
  cfg.gen_len = 12;
  cfg.block_size = 6;
  cfg.eta = 0.2;
  cfg.tau = 0.5;
  cfg.seed = 3;
  std::vector<long> masked_per_step;
  const StepObserver obs = [&](const StepInfo& info) {
    masked_per_step.push_back(static_cast<long>(info.dists.size()));
  };
  const auto run = run_decode(w, std::vector<Token>{1}, cfg, obs);
  const long cap = 1 + static_cast<long>(std::floor(1.0 / cfg.eta));
  REQUIRE(masked_per_step.size() == run.trace.steps.size());
  for (std::size_t i = 0; i < run.trace.steps.size(); ++i) {
    const long limit = run.trace.meta.seq_len + masked_per_step[i] * cap;
    CHECK(run.trace.steps[i].forward_len <= limit);
  }
}

TEST_CASE("markov decode completes across all strategies") {
  SplitMix64 rng(31);
  const auto spec = random_chain(rng, 5);
  const Vocab vocab = spec.decode_vocab();
  for (Strategy strategy :
       {Strategy::baseline, Strategy::cbpd, Strategy::leap}) {
    DecodeConfig cfg;
    cfg.strategy = strategy;
    cfg.gen_len = 8;
    cfg.block_size = 4;
    cfg.seed = 4;
    const auto x0 = sample_sequence(spec, 8, 17);
    const auto xt = corrupt(x0, 0.4, vocab.mask_id, 18);
    const auto state = state_from_tokens(xt, 0, cfg.block_size, vocab);
    const auto run = run_decode(spec, state, cfg);
    CHECK(run.trace.total_events() == static_cast<long>(state.masked.size()));
    for (Token t : run.tokens) CHECK(t != vocab.mask_id);
    if (strategy == Strategy::leap)
      CHECK(run.trace.meta.strategy == "leap-exact");
  }
}

TEST_CASE("convergence targets cover every decoded position") {
  const auto w = seeded_weights(71, small_dims());
  DecodeConfig cfg;
  cfg.gen_len = 8;
  cfg.block_size = 4;
  cfg.seed = 5;
  const std::vector<Token> prompt{2, 4};
  const auto target = convergence_target(w, prompt, cfg);
  CHECK(target.entries.size() == 8);
  cfg.strategy = Strategy::cbpd;
  const auto run = run_decode(w, prompt, cfg);
  const auto steps = static_cast<int>(run.trace.steps.size());
  for (const auto& [pos, entry] : target.entries) {
    CHECK(entry.tau >= 1);
    CHECK(entry.tau <= steps);
    CHECK(entry.token == run.tokens[static_cast<std::size_t>(pos)]);
    CHECK(entry.token != 11);
    // Trace self-consistency: the commit-step snapshot already shows the
    // committed token as the greedy prediction.
    const auto& commit_step =
        run.trace.steps[static_cast<std::size_t>(entry.tau - 1)];
    bool found = false;
    for (const auto& snap : commit_step.snapshots) {
      if (snap.pos == pos) {
        CHECK(snap.token == entry.token);
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("cbpd threshold sets are monotone in phi on replayed snapshots") {
  const auto w = seeded_weights(81, small_dims());
  DecodeConfig cfg;
  cfg.strategy = Strategy::cbpd;
  cfg.gen_len = 8;
  cfg.block_size = 8;
  cfg.phi = 0.6;
  cfg.seed = 6;
  const auto run = run_decode(w, std::vector<Token>{1}, cfg);
  for (const auto& step : run.trace.steps) {
    std::set<int> loose, strict;
    for (const auto& snap : step.snapshots) {
      if (snap.conf > 0.8) loose.insert(snap.pos);
      if (snap.conf > 0.9) strict.insert(snap.pos);
    }
    for (int p : strict) CHECK(loose.count(p) == 1);
  }
}

TEST_CASE("trace files round-trip") {
  const auto w = seeded_weights(91, small_dims());
  DecodeConfig cfg;
  cfg.gen_len = 4;
  cfg.block_size = 4;
  cfg.seed = 7;
  const auto run = run_decode(w, std::vector<Token>{}, cfg);
  const std::string text = trace_to_jsonl(run.trace);
  const auto loaded = trace_from_jsonl(text);
  CHECK(trace_to_jsonl(loaded) == text);
  CHECK_THROWS_AS(trace_from_jsonl("{not json}\n"), DataError);
}
