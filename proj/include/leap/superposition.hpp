#pragma once

#include "leap/backend/forward.hpp"
#include "leap/config.hpp"
#include "leap/sequence.hpp"
#include "leap/types.hpp"
#include "leap/vocab.hpp"

#include <map>
#include <set>
#include <vector>

namespace leap {

struct Candidate {
  Token token = 0;
  double prob = 0.0;
};

/// Plausible future tokens for one masked position, probability >= eta,
/// sorted by descending probability (ties to the smaller id). The mask token
/// is never a candidate.
struct CandidateSet {
  int owner = -1;
  std::vector<Candidate> tokens;
};

enum class RowKind { original, copy, candidate };

struct LayoutRow {
  RowKind kind = RowKind::original;
  int position_id = 0;
  Token token = 0;
  int owner = -1;  // masked position served, -1 for original rows
};

/// Augmented sequence: the L original rows followed, per masked position in
/// ascending order, by one mask copy row and that position's candidate rows,
/// all carrying the owner's position id.
struct SuperposedLayout {
  std::vector<LayoutRow> rows;
  int original_len = 0;
  Token mask_id = 0;
  std::map<int, int> copy_row;                 // owner -> row index
  std::map<int, std::vector<int>> cand_rows;   // owner -> row indices

  int total_rows() const { return static_cast<int>(rows.size()); }
  bool is_masked_original(int k) const {
    return rows[k].kind == RowKind::original && rows[k].token == mask_id;
  }
};

/// Filters each distribution at probability >= eta, drops the mask token,
/// sorts by descending probability. The size never exceeds floor(1/eta).
std::map<int, CandidateSet> prune_candidates(
    const std::map<int, VecD>& prev_dists, double eta, Token mask_id);

/// Builds the augmented layout for the active block's masked positions.
/// `candidates` must be keyed exactly by those positions.
SuperposedLayout build_layout(const SequenceState& state,
                              const std::map<int, CandidateSet>& candidates,
                              const Vocab& vocab);

/// Visibility rules:
///  (a) original rows see exactly the original rows;
///  (b) augment: copy c_i sees unmasked originals, every copy row (itself
///      included), and candidate rows owned by j != i — never the original
///      masked rows (each masked position reaches c_i through its copy row
///      exactly once, which is what makes copy and original predictions
///      coincide when no candidates are present) and never its own
///      candidates;
///  (c) replace: copy c_i sees unmasked originals, itself, and candidate
///      rows owned by j != i;
///  (d) candidate rows see the original rows (augment) or the unmasked
///      original rows (replace) plus themselves; never other candidates or
///      copies.
VisibilityMask build_visibility(const SuperposedLayout& layout,
                                VisibilityMode mode);

struct Prediction {
  Token token = 0;
  double conf = 0.0;
};

/// Original-context and perturbed-context readouts of a superposed pass.
struct ExtractResult {
  std::map<int, VecD> original_dists;      // full rows at original positions
  std::map<int, Prediction> original_top;  // greedy over non-mask tokens
  std::map<int, Prediction> copy_top;      // copy-row greedy, non-mask
};

ExtractResult extract(const SuperposedLayout& layout,
                      const ForwardOutput& output, const Vocab& vocab);

/// Positions whose original and perturbed greedy tokens agree and whose
/// original confidence is >= tau (inclusive).
std::set<int> consistent_set(const std::map<int, Prediction>& original,
                             const std::map<int, Prediction>& perturbed,
                             double tau);

}  // namespace leap
