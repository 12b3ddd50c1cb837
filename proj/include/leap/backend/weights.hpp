#pragma once

#include "leap/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace leap {

struct ModelDims {
  int d_model = 0;
  int n_heads = 0;
  int n_layers = 0;
  int d_ffn = 0;
  int vocab = 0;    // includes the mask token (highest id)
  int max_pos = 0;

  int head_dim() const { return d_model / n_heads; }
  void validate() const;
};

/// One transformer block, pre-normalization layout. Projections use the
/// row-vector convention: out = in * W, so W maps (in_dim x out_dim).
struct LayerWeights {
  VecF ln1_scale, ln1_bias;   // attention pre-norm
  VecF ln2_scale, ln2_bias;   // feed-forward pre-norm
  MatF wq, wk, wv, wo;        // d_model x d_model
  MatF ffn_in;                // d_model x d_ffn
  VecF ffn_in_bias;           // d_ffn
  MatF ffn_out;               // d_ffn x d_model
  VecF ffn_out_bias;          // d_model
};

/// Denoiser parameters. Serialization and seeded fill both walk the tensors
/// in the canonical order: tok_emb; per layer ln1_scale, ln1_bias, ln2_scale,
/// ln2_bias, wq, wk, wv, wo, ffn_in, ffn_in_bias, ffn_out, ffn_out_bias;
/// final_scale, final_bias; unemb. Matrices are row-major.
struct DenoiserWeights {
  ModelDims dims;
  MatF tok_emb;               // vocab x d_model
  std::vector<LayerWeights> layers;
  VecF final_scale, final_bias;
  MatF unemb;                 // d_model x vocab
};

/// Visits every tensor in canonical order as (data pointer, element count,
/// fan_in, fan_out). Vectors use fan_in = fan_out = length.
void for_each_tensor(DenoiserWeights& w,
                     const std::function<void(float*, std::size_t, int, int)>& fn);

/// Deterministic Glorot-uniform fill from a single SplitMix64 stream: each
/// element draws u in [0,1) (top 53 bits) and stores
/// float(a * (2u - 1)) with a = sqrt(6 / (fan_in + fan_out)).
DenoiserWeights seeded_weights(std::uint64_t seed, const ModelDims& dims);

/// Weight file: magic "LEAPW1", then 7 little-endian u32s (d_model, n_heads,
/// n_layers, d_ffn, vocab, max_pos, reserved=0), then all tensors as
/// little-endian binary32 in canonical order, matrices row-major.
void save_weights(const DenoiserWeights& w, const std::string& path);
DenoiserWeights load_weights(const std::string& path);

bool weights_equal(const DenoiserWeights& a, const DenoiserWeights& b);

}  // namespace leap
