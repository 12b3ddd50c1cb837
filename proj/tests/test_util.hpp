#pragma once

#include "leap/backend/weights.hpp"
#include "leap/markov.hpp"
#include "leap/splitmix.hpp"
#include "leap/types.hpp"

#include <vector>

namespace leap::testutil {

inline ModelDims small_dims(int vocab = 12, int layers = 2, int d_model = 16,
                            int heads = 4, int ffn = 32, int max_pos = 128) {
  ModelDims dims;
  dims.d_model = d_model;
  dims.n_heads = heads;
  dims.n_layers = layers;
  dims.d_ffn = ffn;
  dims.vocab = vocab;
  dims.max_pos = max_pos;
  return dims;
}

inline std::vector<Token> random_tokens(SplitMix64& rng, int len, int vocab,
                                        Token exclude = -1) {
  std::vector<Token> out(static_cast<std::size_t>(len));
  for (auto& t : out) {
    do {
      t = static_cast<Token>(rng.next_below(static_cast<std::uint64_t>(vocab)));
    } while (t == exclude);
  }
  return out;
}

/// Random strictly positive chain: rows drawn uniform in (0.05, 1.05) and
/// normalized.
inline MarkovSpec random_chain(SplitMix64& rng, int vocab) {
  MarkovSpec spec;
  spec.vocab = vocab;
  spec.initial.resize(vocab);
  for (int v = 0; v < vocab; ++v)
    spec.initial(v) = rng.next_uniform(0.05, 1.05);
  spec.initial /= spec.initial.sum();
  spec.transition.resize(vocab, vocab);
  for (int r = 0; r < vocab; ++r) {
    for (int c = 0; c < vocab; ++c)
      spec.transition(r, c) = rng.next_uniform(0.05, 1.05);
    spec.transition.row(r) /= spec.transition.row(r).sum();
  }
  return spec;
}

}  // namespace leap::testutil
