#include "leap/superposition.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <algorithm>
#include <string>

namespace leap {

std::map<int, CandidateSet> prune_candidates(
    const std::map<int, VecD>& prev_dists, double eta, Token mask_id) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DataError("eta must be in (0,1]");
  std::map<int, CandidateSet> out;
  for (const auto& [pos, dist] : prev_dists) {
    CandidateSet set;
    set.owner = pos;
    for (Eigen::Index v = 0; v < dist.size(); ++v) {
      if (static_cast<Token>(v) == mask_id) continue;
      if (dist(v) >= eta)
        set.tokens.push_back({static_cast<Token>(v), dist(v)});
    }
    std::stable_sort(set.tokens.begin(), set.tokens.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.prob != b.prob) return a.prob > b.prob;
                       return a.token < b.token;
                     });
    out.emplace(pos, std::move(set));
  }
  return out;
}

SuperposedLayout build_layout(const SequenceState& state,
                              const std::map<int, CandidateSet>& candidates,
                              const Vocab& vocab) {
  if (state.masked.empty()) {
    if (!candidates.empty())
      throw DataError("candidate sets given for a fully decoded sequence");
  } else {
    const BlockSpan block = active_block(state);
    for (const auto& [pos, set] : candidates) {
      if (state.masked.count(pos) == 0 || !block.contains(pos))
        throw DataError("candidate set for a position outside the active "
                        "block's masked set: " +
                        std::to_string(pos));
      if (set.owner != pos) throw DataError("candidate set owner mismatch");
    }
    for (int pos : state.masked)
      if (block.contains(pos) && candidates.count(pos) == 0)
        throw DataError("missing candidate set for masked position " +
                        std::to_string(pos));
  }

  SuperposedLayout layout;
  layout.original_len = state.seq_len();
  layout.mask_id = vocab.mask_id;
  layout.rows.reserve(state.tokens.size());
  for (int p = 0; p < state.seq_len(); ++p)
    layout.rows.push_back({RowKind::original, p, state.tokens[p], -1});
  for (const auto& [pos, set] : candidates) {  // map order = ascending owner
    layout.copy_row[pos] = layout.total_rows();
    layout.rows.push_back({RowKind::copy, pos, vocab.mask_id, pos});
    auto& rows = layout.cand_rows[pos];
    for (const Candidate& c : set.tokens) {
      rows.push_back(layout.total_rows());
      layout.rows.push_back({RowKind::candidate, pos, c.token, pos});
    }
  }
  return layout;
}

VisibilityMask build_visibility(const SuperposedLayout& layout,
                                VisibilityMode mode) {
  const int n = layout.total_rows();
  const int L = layout.original_len;
  VisibilityMask mask;
  mask.allowed = BoolGrid::Constant(n, n, false);

  for (int q = 0; q < n; ++q) {
    const LayoutRow& row = layout.rows[q];
    switch (row.kind) {
      case RowKind::original:
        for (int k = 0; k < L; ++k) mask.allowed(q, k) = true;
        break;
      case RowKind::copy:
        for (int k = 0; k < n; ++k) {
          const LayoutRow& key = layout.rows[k];
          switch (key.kind) {
            case RowKind::original:
              mask.allowed(q, k) = !layout.is_masked_original(k);
              break;
            case RowKind::copy:
              mask.allowed(q, k) =
                  mode == VisibilityMode::augment ? true : k == q;
              break;
            case RowKind::candidate:
              mask.allowed(q, k) = key.owner != row.owner;
              break;
          }
        }
        break;
      case RowKind::candidate:
        for (int k = 0; k < L; ++k)
          mask.allowed(q, k) = mode == VisibilityMode::augment
                                   ? true
                                   : !layout.is_masked_original(k);
        mask.allowed(q, q) = true;
        break;
    }
  }
  return mask;
}

ExtractResult extract(const SuperposedLayout& layout,
                      const ForwardOutput& output, const Vocab& vocab) {
  if (output.probs.rows() != layout.total_rows())
    throw DataError("forward output does not match layout row count");
  ExtractResult res;
  for (const auto& [pos, copy_idx] : layout.copy_row) {
    const auto orig_row = output.probs.row(pos);
    VecD dist(orig_row.size());
    for (Eigen::Index v = 0; v < orig_row.size(); ++v)
      dist(v) = static_cast<double>(orig_row(v));
    const Eigen::Index best = argmax_lowest(dist, vocab.mask_id);
    res.original_top[pos] = {static_cast<Token>(best), dist(best)};
    res.original_dists.emplace(pos, std::move(dist));

    const auto copy_row = output.probs.row(copy_idx);
    const Eigen::Index cbest =
        argmax_lowest(copy_row, static_cast<Eigen::Index>(vocab.mask_id));
    res.copy_top[pos] = {static_cast<Token>(cbest),
                         static_cast<double>(copy_row(cbest))};
  }
  return res;
}

std::set<int> consistent_set(const std::map<int, Prediction>& original,
                             const std::map<int, Prediction>& perturbed,
                             double tau) {
  std::set<int> out;
  for (const auto& [pos, orig] : original) {
    auto it = perturbed.find(pos);
    if (it == perturbed.end())
      throw DataError("perturbed predictions missing position " +
                      std::to_string(pos));
    if (orig.token == it->second.token && orig.conf >= tau) out.insert(pos);
  }
  if (perturbed.size() != original.size())
    throw DataError("original and perturbed prediction keys differ");
  return out;
}

}  // namespace leap
