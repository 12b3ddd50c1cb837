#pragma once

#include "leap/decoding.hpp"
#include "leap/denoiser.hpp"
#include "leap/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leap {

/// Early-correct / early-converged fractions by confidence bin over all
/// pre-commit snapshots. Bins with zero snapshots report absent fractions.
struct BinnedStats {
  std::vector<double> edges;                         // size bins + 1
  std::vector<long> count;
  std::vector<std::optional<double>> early_correct;
  std::vector<std::optional<double>> early_converged;
};

/// A snapshot of position i at step s < tau_i is early-correct when its
/// greedy token equals the committed token, and early-converged when every
/// snapshot from s up to the commit agrees with it.
BinnedStats early_stats(const DecodeTrace& trace,
                        const ConvergenceTarget& target, int bins = 10);

/// Corpus-level aggregation: bin counts summed across runs.
BinnedStats early_stats(const std::vector<const DecodeTrace*>& traces,
                        const std::vector<const ConvergenceTarget*>& targets,
                        int bins = 10);

/// Distribution of the committed token's probability at the step preceding
/// its commit. Tokens without a prior snapshot are excluded and counted, as
/// are tokens whose prior greedy differs from the commit (the trace records
/// only the top-1 probability).
struct CdfStats {
  std::vector<double> edges;
  std::vector<long> count;
  std::vector<double> density;  // count / (included * bin width)
  std::vector<double> cdf;      // cumulative fraction of included tokens
  long included = 0;
  long excluded_no_prior = 0;
  long excluded_top1_mismatch = 0;

  /// Confidence value at a cumulative level, linearly interpolated.
  double conf_at(double cumulative) const;
};

CdfStats prev_conf_cdf(const std::vector<const DecodeTrace*>& traces,
                       const std::vector<const ConvergenceTarget*>& targets,
                       int bins = 10);

/// True iff the greedy token at `position` matches the unperturbed greedy
/// under every assignment that fills any subset of the other masked
/// positions with one of their candidates. Plain forwards only; the product
/// of (|candidates| + 1) over the other positions must not exceed `bound`.
bool oracle_converged(const Denoiser& den, const std::vector<Token>& tokens,
                      int position,
                      const std::map<int, CandidateSet>& candidates,
                      long bound = 4096);

struct DetectorStepCounts {
  int item = 0;
  int step = 0;
  long tp = 0, fp = 0, fn = 0;
};

/// Detector quality of the consistency set against the invariance oracle,
/// gated at tau on both sides.
struct DetectorReport {
  std::vector<DetectorStepCounts> steps;
  long tp = 0, fp = 0, fn = 0;

  std::optional<double> precision() const;
  std::optional<double> recall() const;
};

DetectorReport detector_quality(const DenoiserWeights& weights,
                                const std::vector<std::vector<Token>>& prompts,
                                const DecodeConfig& cfg);

std::string binned_stats_to_csv(const BinnedStats& stats);
std::string cdf_stats_to_csv(const CdfStats& stats);
std::string detector_report_to_csv(const DetectorReport& report);

}  // namespace leap
