#pragma once

#include "leap/backend/weights.hpp"
#include "leap/types.hpp"

#include <string>
#include <vector>

namespace leap {

/// Row-to-row attention visibility: allowed(q, k) == true lets query row q
/// attend to key row k. Every row must keep at least one visible key.
struct VisibilityMask {
  BoolGrid allowed;

  Eigen::Index rows() const { return allowed.rows(); }
  static VisibilityMask full(Eigen::Index n);
  void validate() const;

  /// Text grid of '1'/'0' rows, one line per query row. Golden-file friendly.
  std::string to_text_grid() const;
};

struct TopPrediction {
  Token token = 0;
  float conf = 0.0f;
};

/// Per-row vocabulary distributions (rows of `probs` sum to 1) plus the
/// argmax prediction per row (ties break to the smaller token id).
struct ForwardOutput {
  MatF probs;  // R x vocab
  std::vector<TopPrediction> top1;
};

/// Bidirectional pre-norm transformer pass over explicit position ids.
///
/// Embedding is tok_emb[token] + sinusoidal(position_id); duplicated position
/// ids therefore produce identical encodings. Invisible keys receive an
/// additive -1e9 before the attention softmax, which underflows to exactly
/// zero weight in binary32. Deterministic for fixed inputs.
ForwardOutput forward(const DenoiserWeights& w,
                      const std::vector<Token>& tokens,
                      const std::vector<int>& position_ids,
                      const VisibilityMask& mask);

/// Sinusoidal absolute encoding for one position id.
VecF sinusoidal_encoding(int position_id, int d_model);

}  // namespace leap
