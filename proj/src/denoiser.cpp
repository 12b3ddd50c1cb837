#include "leap/denoiser.hpp"

#include "leap/error.hpp"

#include <numeric>
#include <string>

namespace leap {

TinyDenoiser::TinyDenoiser(const DenoiserWeights& weights)
    : weights_(&weights) {
  weights.dims.validate();
  vocab_ = Vocab{weights.dims.vocab, weights.dims.vocab - 1, {}};
}

std::map<int, VecD> TinyDenoiser::conditionals(
    const std::vector<Token>& tokens,
    const std::vector<int>& positions) const {
  const auto n = static_cast<Eigen::Index>(tokens.size());
  std::vector<int> ids(tokens.size());
  std::iota(ids.begin(), ids.end(), 0);
  const ForwardOutput out =
      forward(*weights_, tokens, ids, VisibilityMask::full(n));
  std::map<int, VecD> dists;
  for (int p : positions) {
    if (p < 0 || p >= static_cast<int>(tokens.size()))
      throw DataError("query position out of range: " + std::to_string(p));
    dists.emplace(p, out.probs.row(p).transpose().cast<double>());
  }
  return dists;
}

ExactDenoiser::ExactDenoiser(const MarkovSpec& spec, int max_len)
    : powers_(spec, max_len), vocab_(spec.decode_vocab()) {}

std::map<int, VecD> ExactDenoiser::conditionals(
    const std::vector<Token>& tokens,
    const std::vector<int>& positions) const {
  const auto all = exact_conditional(powers_, tokens);
  std::map<int, VecD> dists;
  for (int p : positions) {
    auto it = all.find(p);
    if (it == all.end())
      throw DataError("query position is not masked: " + std::to_string(p));
    VecD padded = VecD::Zero(vocab_.size);
    padded.head(it->second.size()) = it->second;
    dists.emplace(p, std::move(padded));
  }
  return dists;
}

}  // namespace leap
