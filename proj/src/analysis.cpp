#include "leap/analysis.hpp"

#include "leap/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace leap {

namespace {

std::vector<double> uniform_edges(int bins) {
  if (bins < 1) throw DataError("bins must be >= 1");
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    edges[static_cast<std::size_t>(b)] =
        static_cast<double>(b) / static_cast<double>(bins);
  return edges;
}

std::size_t bin_of(const std::vector<double>& edges, double value) {
  const auto bins = edges.size() - 1;
  for (std::size_t b = 0; b + 1 < bins; ++b)
    if (value < edges[b + 1]) return b;
  return bins - 1;  // last bin closed at 1.0
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct SnapAtStep {
  int step = 0;
  Token token = 0;
  double conf = 0.0;
};

/// Per-position snapshot series, step-ascending (trace order).
std::map<int, std::vector<SnapAtStep>> snapshot_series(
    const DecodeTrace& trace) {
  std::map<int, std::vector<SnapAtStep>> series;
  for (const StepRecord& rec : trace.steps)
    for (const Snapshot& s : rec.snapshots)
      series[s.pos].push_back({rec.step, s.token, s.conf});
  return series;
}

void check_same_run(const DecodeTrace& trace, const ConvergenceTarget& target) {
  const ConvergenceTarget from_trace = convergence_target_from_trace(trace);
  if (from_trace.entries.size() != target.entries.size())
    throw DataError("trace and target decode different position sets");
  for (const auto& [pos, entry] : target.entries) {
    (void)entry;
    if (from_trace.entries.count(pos) == 0)
      throw DataError("target position " + std::to_string(pos) +
                      " never decoded in trace");
  }
}

}  // namespace

namespace {

void accumulate_early(const DecodeTrace& trace, const ConvergenceTarget& target,
                      const std::vector<double>& edges,
                      std::vector<long>& count, std::vector<long>& correct,
                      std::vector<long>& converged) {
  check_same_run(trace, target);
  const auto series = snapshot_series(trace);
  for (const auto& [pos, entry] : target.entries) {
    auto it = series.find(pos);
    if (it == series.end()) continue;
    const auto& snaps = it->second;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      if (snaps[k].step >= entry.tau) continue;  // pre-commit snapshots only
      const std::size_t b = bin_of(edges, snaps[k].conf);
      ++count[b];
      const bool is_correct = snaps[k].token == entry.token;
      if (is_correct) ++correct[b];
      bool is_converged = is_correct;
      for (std::size_t m = k + 1; is_converged && m < snaps.size(); ++m) {
        if (snaps[m].step >= entry.tau) break;
        if (snaps[m].token != entry.token) is_converged = false;
      }
      if (is_converged) ++converged[b];
    }
  }
}

BinnedStats finalize_early(std::vector<double> edges, std::vector<long> count,
                           const std::vector<long>& correct,
                           const std::vector<long>& converged) {
  BinnedStats stats;
  stats.edges = std::move(edges);
  stats.count = std::move(count);
  stats.early_correct.resize(stats.count.size());
  stats.early_converged.resize(stats.count.size());
  for (std::size_t b = 0; b < stats.count.size(); ++b) {
    if (stats.count[b] > 0) {
      stats.early_correct[b] =
          static_cast<double>(correct[b]) / static_cast<double>(stats.count[b]);
      stats.early_converged[b] = static_cast<double>(converged[b]) /
                                 static_cast<double>(stats.count[b]);
    }
  }
  return stats;
}

}  // namespace

BinnedStats early_stats(const DecodeTrace& trace,
                        const ConvergenceTarget& target, int bins) {
  const auto edges = uniform_edges(bins);
  std::vector<long> count(static_cast<std::size_t>(bins), 0);
  std::vector<long> correct(static_cast<std::size_t>(bins), 0);
  std::vector<long> converged(static_cast<std::size_t>(bins), 0);
  accumulate_early(trace, target, edges, count, correct, converged);
  return finalize_early(edges, count, correct, converged);
}

BinnedStats early_stats(const std::vector<const DecodeTrace*>& traces,
                        const std::vector<const ConvergenceTarget*>& targets,
                        int bins) {
  if (traces.empty() || traces.size() != targets.size())
    throw DataError("early_stats needs matched nonempty traces and targets");
  const auto edges = uniform_edges(bins);
  std::vector<long> count(static_cast<std::size_t>(bins), 0);
  std::vector<long> correct(static_cast<std::size_t>(bins), 0);
  std::vector<long> converged(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < traces.size(); ++i)
    accumulate_early(*traces[i], *targets[i], edges, count, correct,
                     converged);
  return finalize_early(edges, count, correct, converged);
}

double CdfStats::conf_at(double cumulative) const {
  if (included == 0) throw DataError("empty distribution");
  if (!(cumulative >= 0.0 && cumulative <= 1.0))
    throw DataError("cumulative level must be in [0,1]");
  double prev_cdf = 0.0;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (cdf[b] >= cumulative) {
      const double lo = edges[b], hi = edges[b + 1];
      if (cdf[b] == prev_cdf) return hi;
      const double t = (cumulative - prev_cdf) / (cdf[b] - prev_cdf);
      return lo + t * (hi - lo);
    }
    prev_cdf = cdf[b];
  }
  return edges.back();
}

CdfStats prev_conf_cdf(const std::vector<const DecodeTrace*>& traces,
                       const std::vector<const ConvergenceTarget*>& targets,
                       int bins) {
  if (traces.empty() || traces.size() != targets.size())
    throw DataError("prev_conf_cdf needs matched nonempty traces and targets");
  CdfStats stats;
  stats.edges = uniform_edges(bins);
  stats.count.assign(static_cast<std::size_t>(bins), 0);

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const DecodeTrace& trace = *traces[i];
    const ConvergenceTarget& target = *targets[i];
    check_same_run(trace, target);
    // snapshot lookup by (step, pos)
    std::map<std::pair<int, int>, Snapshot> at;
    for (const StepRecord& rec : trace.steps)
      for (const Snapshot& s : rec.snapshots) at[{rec.step, s.pos}] = s;
    for (const auto& [pos, entry] : target.entries) {
      auto it = at.find({entry.tau - 1, pos});
      if (it == at.end()) {
        ++stats.excluded_no_prior;
        continue;
      }
      if (it->second.token != entry.token) {
        // Only the top-1 probability is recorded; the committed token's
        // probability at the preceding step is unobservable here.
        ++stats.excluded_top1_mismatch;
        continue;
      }
      ++stats.count[bin_of(stats.edges, it->second.conf)];
      ++stats.included;
    }
  }

  stats.density.assign(stats.count.size(), 0.0);
  stats.cdf.assign(stats.count.size(), 0.0);
  long running = 0;
  for (std::size_t b = 0; b < stats.count.size(); ++b) {
    running += stats.count[b];
    const double width = stats.edges[b + 1] - stats.edges[b];
    if (stats.included > 0) {
      stats.density[b] = static_cast<double>(stats.count[b]) /
                         (static_cast<double>(stats.included) * width);
      stats.cdf[b] =
          static_cast<double>(running) / static_cast<double>(stats.included);
    }
  }
  return stats;
}

bool oracle_converged(const Denoiser& den, const std::vector<Token>& tokens,
                      int position,
                      const std::map<int, CandidateSet>& candidates,
                      long bound) {
  const Token mask = den.vocab().mask_id;
  if (position < 0 || position >= static_cast<int>(tokens.size()) ||
      tokens[static_cast<std::size_t>(position)] != mask)
    throw DataError("oracle_converged: position must be masked");

  std::vector<const CandidateSet*> others;
  long combos = 1;
  for (const auto& [pos, set] : candidates) {
    if (pos == position || set.tokens.empty()) continue;
    if (tokens[static_cast<std::size_t>(pos)] != mask)
      throw DataError("candidate set for an unmasked position");
    others.push_back(&set);
    combos *= static_cast<long>(set.tokens.size()) + 1;
    if (combos > bound)
      throw BoundError("convergence oracle enumeration exceeds bound of " +
                       std::to_string(bound) + " assignments");
  }

  const std::vector<int> query{position};
  auto greedy_at = [&](const std::vector<Token>& ctx) {
    return greedy_decode(den.conditionals(ctx, query).at(position), mask).token;
  };
  const Token base = greedy_at(tokens);

  // Odometer over {masked} + candidates per other position.
  std::vector<int> state(others.size(), -1);
  std::vector<Token> filled = tokens;
  while (true) {
    std::size_t k = 0;
    for (; k < state.size(); ++k) {
      if (++state[k] < static_cast<int>(others[k]->tokens.size())) {
        filled[static_cast<std::size_t>(others[k]->owner)] =
            others[k]->tokens[static_cast<std::size_t>(state[k])].token;
        break;
      }
      state[k] = -1;
      filled[static_cast<std::size_t>(others[k]->owner)] = mask;
    }
    if (k == state.size()) break;  // wrapped: every assignment visited
    if (greedy_at(filled) != base) return false;
  }
  return true;
}

std::optional<double> DetectorReport::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> DetectorReport::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

DetectorReport detector_quality(const DenoiserWeights& weights,
                                const std::vector<std::vector<Token>>& prompts,
                                const DecodeConfig& cfg) {
  if (prompts.empty()) throw DataError("detector_quality needs prompts");
  DecodeConfig leap_cfg = cfg;
  leap_cfg.strategy = Strategy::leap;
  TinyDenoiser den(weights);

  DetectorReport report;
  for (std::size_t item = 0; item < prompts.size(); ++item) {
    const StepObserver obs = [&](const StepInfo& info) {
      if (!info.lookahead) return;
      std::set<int> detected;
      for (const DecodeEvent& e : info.decode->events)
        if (e.mech == Mechanism::consistency) detected.insert(e.pos);
      DetectorStepCounts counts;
      counts.item = static_cast<int>(item);
      counts.step = info.step;
      for (const auto& [pos, pred] : info.original_top) {
        const bool oracle =
            pred.conf >= cfg.tau &&
            oracle_converged(den, info.pre_tokens, pos, info.candidates);
        const bool hit = detected.count(pos) != 0;
        if (oracle && hit) ++counts.tp;
        if (!oracle && hit) ++counts.fp;
        if (oracle && !hit) ++counts.fn;
      }
      report.steps.push_back(counts);
      report.tp += counts.tp;
      report.fp += counts.fp;
      report.fn += counts.fn;
    };
    run_decode(weights, prompts[item], leap_cfg, obs);
  }
  return report;
}

std::string binned_stats_to_csv(const BinnedStats& stats) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count,early_correct,early_converged\n";
  for (std::size_t b = 0; b < stats.count.size(); ++b) {
    out << fmt(stats.edges[b]) << ',' << fmt(stats.edges[b + 1]) << ','
        << stats.count[b] << ','
        << (stats.early_correct[b] ? fmt(*stats.early_correct[b]) : "") << ','
        << (stats.early_converged[b] ? fmt(*stats.early_converged[b]) : "")
        << '\n';
  }
  return out.str();
}

std::string cdf_stats_to_csv(const CdfStats& stats) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,density,cdf\n";
  for (std::size_t b = 0; b < stats.count.size(); ++b) {
    out << fmt(stats.edges[b]) << ',' << fmt(stats.edges[b + 1]) << ','
        << fmt(stats.density[b]) << ',' << fmt(stats.cdf[b]) << '\n';
  }
  return out.str();
}

std::string detector_report_to_csv(const DetectorReport& report) {
  std::ostringstream out;
  out << "item,step,tp,fp,fn,precision,recall\n";
  for (const DetectorStepCounts& c : report.steps) {
    out << c.item << ',' << c.step << ',' << c.tp << ',' << c.fp << ','
        << c.fn << ',';
    if (c.tp + c.fp > 0)
      out << fmt(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp));
    out << ',';
    if (c.tp + c.fn > 0)
      out << fmt(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn));
    out << '\n';
  }
  out << "aggregate,," << report.tp << ',' << report.fp << ',' << report.fn
      << ',';
  if (auto p = report.precision()) out << fmt(*p);
  out << ',';
  if (auto r = report.recall()) out << fmt(*r);
  out << '\n';
  return out.str();
}

}  // namespace leap
