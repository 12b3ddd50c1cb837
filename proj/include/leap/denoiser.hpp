#pragma once

#include "leap/backend/forward.hpp"
#include "leap/backend/weights.hpp"
#include "leap/markov.hpp"
#include "leap/types.hpp"
#include "leap/vocab.hpp"

#include <map>
#include <vector>

namespace leap {

/// A denoiser answers plain (non-superposed) contexts: full-vocabulary
/// distributions for the requested masked positions. Implementations are
/// immutable after construction and safe to share across runs.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual const Vocab& vocab() const = 0;
  virtual std::map<int, VecD> conditionals(
      const std::vector<Token>& tokens,
      const std::vector<int>& positions) const = 0;
};

/// Transformer-backed denoiser: one full-visibility pass over the sequence,
/// position ids 0..L-1. The mask token is the highest vocabulary id.
class TinyDenoiser : public Denoiser {
 public:
  explicit TinyDenoiser(const DenoiserWeights& weights);

  const Vocab& vocab() const override { return vocab_; }
  std::map<int, VecD> conditionals(
      const std::vector<Token>& tokens,
      const std::vector<int>& positions) const override;

  const DenoiserWeights& weights() const { return *weights_; }

 private:
  const DenoiserWeights* weights_;
  Vocab vocab_;
};

/// Perfect denoiser over the chain: exact posteriors, padded with zero mass
/// on the mask id.
class ExactDenoiser : public Denoiser {
 public:
  ExactDenoiser(const MarkovSpec& spec, int max_len);

  const Vocab& vocab() const override { return vocab_; }
  std::map<int, VecD> conditionals(
      const std::vector<Token>& tokens,
      const std::vector<int>& positions) const override;

  const MarkovPowers& powers() const { return powers_; }

 private:
  MarkovPowers powers_;
  Vocab vocab_;
};

}  // namespace leap
