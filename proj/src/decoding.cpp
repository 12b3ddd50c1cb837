#include "leap/decoding.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <algorithm>
#include <chrono>
#include <string>

namespace leap {

std::pair<Token, double> greedy(const VecD& dist) {
  if (dist.size() == 0) throw DataError("empty distribution");
  const Eigen::Index best = argmax_lowest(dist);
  return {static_cast<Token>(best), dist(best)};
}

Prediction greedy_decode(const VecD& dist, Token mask_id) {
  if (dist.size() < 2) throw DataError("distribution too short");
  const Eigen::Index best =
      argmax_lowest(dist, static_cast<Eigen::Index>(mask_id));
  return {static_cast<Token>(best), dist(best)};
}

namespace {

std::vector<int> active_masked(const SequenceState& state,
                               const BlockSpan& block) {
  std::vector<int> out;
  for (int p : state.masked)
    if (block.contains(p)) out.push_back(p);
  return out;
}

void check_dists_cover_block(const SequenceState& state,
                             const std::map<int, VecD>& dists) {
  const BlockSpan block = active_block(state);
  const std::vector<int> active = active_masked(state, block);
  if (dists.size() != active.size())
    throw DataError("distributions must cover exactly the active block's "
                    "masked positions");
  for (int p : active)
    if (dists.count(p) == 0)
      throw DataError("missing distribution for masked position " +
                      std::to_string(p));
}

DecodeEvent fallback_event(const std::map<int, Prediction>& preds) {
  const int* best_pos = nullptr;
  const Prediction* best = nullptr;
  for (const auto& [pos, pred] : preds) {
    if (best == nullptr || pred.conf > best->conf) {
      best_pos = &pos;
      best = &pred;
    }
  }
  return {*best_pos, best->token, best->conf, Mechanism::fallback};
}

std::map<int, Prediction> greedy_all(const std::map<int, VecD>& dists,
                                     Token mask_id) {
  std::map<int, Prediction> out;
  for (const auto& [pos, dist] : dists)
    out.emplace(pos, greedy_decode(dist, mask_id));
  return out;
}

}  // namespace

DecodeSet step_cbpd(const SequenceState& state,
                    const std::map<int, VecD>& dists, double phi,
                    const Vocab& vocab) {
  check_dists_cover_block(state, dists);
  const auto preds = greedy_all(dists, vocab.mask_id);
  DecodeSet out;
  for (const auto& [pos, pred] : preds)
    if (pred.conf > phi)
      out.events.push_back({pos, pred.token, pred.conf, Mechanism::threshold});
  if (out.events.empty()) out.events.push_back(fallback_event(preds));
  return out;
}

DecodeSet step_baseline(const SequenceState& state,
                        const std::map<int, VecD>& dists, const Vocab& vocab) {
  check_dists_cover_block(state, dists);
  const auto preds = greedy_all(dists, vocab.mask_id);
  DecodeSet out;
  out.events.push_back(fallback_event(preds));
  return out;
}

namespace {

DecodeSet build_leap_events(const std::map<int, Prediction>& original,
                            const std::set<int>& consistent,
                            const DecodeConfig& cfg) {
  DecodeSet out;
  for (const auto& [pos, pred] : original) {
    if (consistent.count(pos)) {
      out.events.push_back({pos, pred.token, pred.conf,
                            Mechanism::consistency});
    } else if (cfg.union_cbpd && pred.conf > cfg.phi) {
      out.events.push_back({pos, pred.token, pred.conf,
                            Mechanism::threshold});
    }
  }
  if (out.events.empty()) out.events.push_back(fallback_event(original));
  return out;
}

}  // namespace

DecodeSet leap_decode_set(const std::map<int, Prediction>& original,
                          const std::map<int, Prediction>& perturbed,
                          const DecodeConfig& cfg) {
  return build_leap_events(original, consistent_set(original, perturbed, cfg.tau),
                           cfg);
}

namespace {

struct StepOutcome {
  DecodeSet decode;
  long forward_len = 0;
  std::map<int, VecD> dists;
  bool lookahead = false;
  std::map<int, Prediction> original_top;
  std::map<int, Prediction> copy_top;
  std::map<int, CandidateSet> candidates;
  std::map<int, bool> converged;
};

bool prev_dists_cover(const SequenceState& state,
                      const std::vector<int>& active) {
  for (int p : active)
    if (state.prev_dists.count(p) == 0) return false;
  return true;
}

StepOutcome plain_strategy_step(const Denoiser& den, SequenceState& state,
                                const BlockSpan& block,
                                const DecodeConfig& cfg) {
  StepOutcome out;
  out.dists = den.conditionals(state.tokens, active_masked(state, block));
  out.forward_len = state.seq_len();
  out.original_top = greedy_all(out.dists, den.vocab().mask_id);
  out.decode = cfg.strategy == Strategy::baseline
                   ? step_baseline(state, out.dists, den.vocab())
                   : step_cbpd(state, out.dists, cfg.phi, den.vocab());
  return out;
}

StepOutcome leap_step_tiny(const TinyDenoiser& den, SequenceState& state,
                           const BlockSpan& block, const DecodeConfig& cfg) {
  const Vocab& vocab = den.vocab();
  const std::vector<int> active = active_masked(state, block);
  if (!prev_dists_cover(state, active)) {
    // Block bootstrap: one plain pass decoded by threshold, which also
    // seeds the candidate cache for the next step.
    StepOutcome out;
    out.dists = den.conditionals(state.tokens, active);
    out.forward_len = state.seq_len();
    out.original_top = greedy_all(out.dists, vocab.mask_id);
    out.decode = step_cbpd(state, out.dists, cfg.phi, vocab);
    return out;
  }

  StepOutcome out;
  out.lookahead = true;
  std::map<int, VecD> prev;
  for (int p : active) prev.emplace(p, state.prev_dists.at(p));
  out.candidates = prune_candidates(prev, cfg.eta, vocab.mask_id);

  const SuperposedLayout layout = build_layout(state, out.candidates, vocab);
  const VisibilityMask vis = build_visibility(layout, cfg.visibility_mode);
  std::vector<Token> tokens;
  std::vector<int> ids;
  tokens.reserve(layout.rows.size());
  ids.reserve(layout.rows.size());
  for (const LayoutRow& row : layout.rows) {
    tokens.push_back(row.token);
    ids.push_back(row.position_id);
  }
  const ForwardOutput fwd = forward(den.weights(), tokens, ids, vis);
  ExtractResult ex = extract(layout, fwd, vocab);

  out.forward_len = layout.total_rows();
  out.dists = std::move(ex.original_dists);
  out.original_top = std::move(ex.original_top);
  out.copy_top = std::move(ex.copy_top);
  out.decode = leap_decode_set(out.original_top, out.copy_top, cfg);
  return out;
}

StepOutcome leap_step_exact(const ExactDenoiser& den, SequenceState& state,
                            const BlockSpan& block, const DecodeConfig& cfg) {
  const Vocab& vocab = den.vocab();
  const std::vector<int> active = active_masked(state, block);
  if (!prev_dists_cover(state, active)) {
    StepOutcome out;
    out.dists = den.conditionals(state.tokens, active);
    out.forward_len = state.seq_len();
    out.original_top = greedy_all(out.dists, vocab.mask_id);
    out.decode = step_cbpd(state, out.dists, cfg.phi, vocab);
    return out;
  }

  StepOutcome out;
  out.lookahead = true;
  std::map<int, VecD> prev;
  for (int p : active) prev.emplace(p, state.prev_dists.at(p));
  out.candidates = prune_candidates(prev, cfg.eta, vocab.mask_id);
  out.dists = den.conditionals(state.tokens, active);
  out.forward_len = state.seq_len();
  out.original_top = greedy_all(out.dists, vocab.mask_id);

  std::set<int> consistent;
  for (int p : active) {
    const bool conv =
        markov_converged(den.powers(), state.tokens, p, out.candidates);
    out.converged[p] = conv;
    if (conv && out.original_top.at(p).conf >= cfg.tau) consistent.insert(p);
  }
  out.decode = build_leap_events(out.original_top, consistent, cfg);
  return out;
}

template <typename StepFn>
DecodeRun decode_loop(SequenceState state, const Vocab& vocab,
                      const DecodeConfig& cfg, const std::string& label,
                      StepFn&& step_fn, const StepObserver& obs) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  DecodeRun run;
  run.trace.meta.strategy = label;
  run.trace.meta.prompt_len = state.prompt_len;
  run.trace.meta.seq_len = state.seq_len();
  run.trace.meta.block_size = state.block_size;
  state.prev_dists.clear();
  state.step = 0;

  while (!state.masked.empty()) {
    const BlockSpan block = active_block(state);
    std::vector<Token> pre_tokens;
    if (obs) pre_tokens = state.tokens;

    StepOutcome out = step_fn(state, block, cfg);

    StepRecord rec;
    rec.step = state.step + 1;
    rec.forward_len = out.forward_len;
    rec.events = out.decode.events;
    std::sort(rec.events.begin(), rec.events.end(),
              [](const DecodeEvent& a, const DecodeEvent& b) {
                return a.pos < b.pos;
              });
    for (const auto& [pos, pred] : out.original_top)
      rec.snapshots.push_back({pos, pred.token, pred.conf});

    std::vector<std::pair<int, Token>> commits;
    commits.reserve(rec.events.size());
    for (const DecodeEvent& e : rec.events) commits.emplace_back(e.pos, e.token);
    apply_decodes(state, commits, vocab);

    state.prev_dists.clear();
    for (auto& [pos, dist] : out.dists)
      if (state.masked.count(pos)) state.prev_dists.emplace(pos, dist);

    run.trace.steps.push_back(rec);
    if (obs) {
      StepInfo info;
      info.step = rec.step;
      info.pre_tokens = std::move(pre_tokens);
      info.block = block;
      info.forward_len = out.forward_len;
      info.lookahead = out.lookahead;
      info.dists = std::move(out.dists);
      info.original_top = std::move(out.original_top);
      info.copy_top = std::move(out.copy_top);
      info.candidates = std::move(out.candidates);
      info.converged = std::move(out.converged);
      info.decode = &out.decode;
      obs(info);
    }
  }

  run.tokens = state.tokens;
  run.trace.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return run;
}

}  // namespace

DecodeRun run_decode(const DenoiserWeights& weights, SequenceState state,
                     const DecodeConfig& cfg, const StepObserver& obs) {
  TinyDenoiser den(weights);
  if (cfg.strategy == Strategy::leap) {
    return decode_loop(std::move(state), den.vocab(), cfg, "leap",
                       [&den](SequenceState& st, const BlockSpan& block,
                              const DecodeConfig& c) {
                         return leap_step_tiny(den, st, block, c);
                       },
                       obs);
  }
  return decode_loop(std::move(state), den.vocab(), cfg,
                     to_string(cfg.strategy),
                     [&den](SequenceState& st, const BlockSpan& block,
                            const DecodeConfig& c) {
                       return plain_strategy_step(den, st, block, c);
                     },
                     obs);
}

DecodeRun run_decode(const DenoiserWeights& weights,
                     const std::vector<Token>& prompt, const DecodeConfig& cfg,
                     const StepObserver& obs) {
  TinyDenoiser den(weights);
  SequenceState state =
      new_state(prompt, cfg.gen_len, cfg.block_size, den.vocab());
  return run_decode(weights, std::move(state), cfg, obs);
}

DecodeRun run_decode(const MarkovSpec& spec, SequenceState state,
                     const DecodeConfig& cfg, const StepObserver& obs) {
  ExactDenoiser den(spec, state.seq_len());
  if (cfg.strategy == Strategy::leap) {
    return decode_loop(std::move(state), den.vocab(), cfg, "leap-exact",
                       [&den](SequenceState& st, const BlockSpan& block,
                              const DecodeConfig& c) {
                         return leap_step_exact(den, st, block, c);
                       },
                       obs);
  }
  return decode_loop(std::move(state), den.vocab(), cfg,
                     to_string(cfg.strategy),
                     [&den](SequenceState& st, const BlockSpan& block,
                            const DecodeConfig& c) {
                       return plain_strategy_step(den, st, block, c);
                     },
                     obs);
}

ConvergenceTarget convergence_target_from_trace(const DecodeTrace& trace) {
  ConvergenceTarget target;
  for (const StepRecord& step : trace.steps) {
    for (const DecodeEvent& e : step.events) {
      if (!target.entries.emplace(e.pos, ConvergenceTarget::Entry{step.step,
                                                                  e.token})
               .second)
        throw DataError("trace decodes position " + std::to_string(e.pos) +
                        " twice");
    }
  }
  return target;
}

ConvergenceTarget convergence_target(const DenoiserWeights& weights,
                                     const std::vector<Token>& prompt,
                                     DecodeConfig cfg) {
  cfg.strategy = Strategy::cbpd;
  return convergence_target_from_trace(
      run_decode(weights, prompt, cfg).trace);
}

ConvergenceTarget convergence_target(const MarkovSpec& spec,
                                     SequenceState state, DecodeConfig cfg) {
  cfg.strategy = Strategy::cbpd;
  return convergence_target_from_trace(
      run_decode(spec, std::move(state), cfg).trace);
}

}  // namespace leap
