#pragma once

#include "leap/config.hpp"
#include "leap/denoiser.hpp"
#include "leap/sequence.hpp"
#include "leap/superposition.hpp"
#include "leap/trace.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace leap {

/// Argmax token and its probability; ties break to the smallest id.
std::pair<Token, double> greedy(const VecD& dist);

/// Greedy over real tokens only: the mask id is never a decode.
Prediction greedy_decode(const VecD& dist, Token mask_id);

struct DecodeSet {
  std::vector<DecodeEvent> events;  // sorted by position, distinct, nonempty
};

/// All active-block positions with confidence strictly above phi; when none
/// qualify, the single highest-confidence position (fallback).
DecodeSet step_cbpd(const SequenceState& state,
                    const std::map<int, VecD>& dists, double phi,
                    const Vocab& vocab);

/// Exactly one event: the highest-confidence masked position of the block.
DecodeSet step_baseline(const SequenceState& state,
                        const std::map<int, VecD>& dists, const Vocab& vocab);

/// The lookahead decision rule on extracted predictions: consistent
/// positions gated at tau, optionally unioned with the strict phi threshold,
/// with the single-argmax fallback when the set is empty.
DecodeSet leap_decode_set(const std::map<int, Prediction>& original,
                          const std::map<int, Prediction>& perturbed,
                          const DecodeConfig& cfg);

/// Everything a step knew, for instrumentation (detector evaluation, replay
/// checks). `lookahead` marks steps where the consistency detector ran.
struct StepInfo {
  int step = 0;                       // 1-based, matches the trace record
  std::vector<Token> pre_tokens;      // sequence before this step's decodes
  BlockSpan block;
  long forward_len = 0;
  bool lookahead = false;
  std::map<int, VecD> dists;          // current-context dists, active masked
  std::map<int, Prediction> original_top;
  std::map<int, Prediction> copy_top;       // transformer lookahead steps
  std::map<int, CandidateSet> candidates;   // lookahead steps
  std::map<int, bool> converged;            // exact lookahead steps
  const DecodeSet* decode = nullptr;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct DecodeRun {
  std::vector<Token> tokens;
  DecodeTrace trace;
};

/// Decodes to completion over the transformer backend. All three strategies;
/// `leap` runs the superposed pass and boots each block with one plain
/// confidence-threshold step to populate the candidate cache.
DecodeRun run_decode(const DenoiserWeights& weights, SequenceState state,
                     const DecodeConfig& cfg, const StepObserver& obs = {});
DecodeRun run_decode(const DenoiserWeights& weights,
                     const std::vector<Token>& prompt, const DecodeConfig& cfg,
                     const StepObserver& obs = {});

/// Decodes over the exact chain denoiser. `leap` is realized as exact
/// lookahead (`leap-exact`): candidate pruning as usual, consistency decided
/// by closed-form invariance over the candidate perturbations.
DecodeRun run_decode(const MarkovSpec& spec, SequenceState state,
                     const DecodeConfig& cfg, const StepObserver& obs = {});

/// Commit step and token per decoded position.
struct ConvergenceTarget {
  struct Entry {
    int tau = 0;     // 1-based decode step
    Token token = 0; // committed token
  };
  std::map<int, Entry> entries;
};

ConvergenceTarget convergence_target_from_trace(const DecodeTrace& trace);
ConvergenceTarget convergence_target(const DenoiserWeights& weights,
                                     const std::vector<Token>& prompt,
                                     DecodeConfig cfg);
ConvergenceTarget convergence_target(const MarkovSpec& spec,
                                     SequenceState state, DecodeConfig cfg);

}  // namespace leap
