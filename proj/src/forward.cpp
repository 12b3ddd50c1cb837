#include "leap/backend/forward.hpp"

#include "leap/error.hpp"
#include "leap/numeric.hpp"

#include <cmath>
#include <string>

namespace leap {

namespace {

constexpr float kNormEps = 1e-5f;
constexpr float kMaskPenalty = -1e9f;

void layer_norm_rows(MatF& x, const VecF& scale, const VecF& bias) {
  const auto d = static_cast<float>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const float mean = row.mean();
    const float var = (row.array() - mean).square().sum() / d;
    const float inv = 1.0f / std::sqrt(var + kNormEps);
    row = (((row.array() - mean) * inv) * scale.transpose().array() +
           bias.transpose().array())
              .matrix();
  }
}

float gelu(float x) {
  return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752440f));
}

}  // namespace

VisibilityMask VisibilityMask::full(Eigen::Index n) {
  VisibilityMask m;
  m.allowed = BoolGrid::Constant(n, n, true);
  return m;
}

void VisibilityMask::validate() const {
  if (allowed.rows() != allowed.cols())
    throw DataError("visibility mask must be square");
  for (Eigen::Index q = 0; q < allowed.rows(); ++q) {
    bool any = false;
    for (Eigen::Index k = 0; k < allowed.cols(); ++k)
      if (allowed(q, k)) { any = true; break; }
    if (!any)
      throw DataError("visibility row " + std::to_string(q) +
                      " has no visible key");
  }
}

std::string VisibilityMask::to_text_grid() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(allowed.rows()) *
              (static_cast<std::size_t>(allowed.cols()) + 1));
  for (Eigen::Index q = 0; q < allowed.rows(); ++q) {
    for (Eigen::Index k = 0; k < allowed.cols(); ++k)
      out.push_back(allowed(q, k) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

VecF sinusoidal_encoding(int position_id, int d_model) {
  VecF pe(d_model);
  const double pos = static_cast<double>(position_id);
  for (int j = 0; j < d_model; ++j) {
    const int pair = j / 2;
    const double freq =
        std::exp(-std::log(10000.0) * (2.0 * pair) / static_cast<double>(d_model));
    const double angle = pos * freq;
    pe(j) = static_cast<float>(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
  }
  return pe;
}

ForwardOutput forward(const DenoiserWeights& w,
                      const std::vector<Token>& tokens,
                      const std::vector<int>& position_ids,
                      const VisibilityMask& mask) {
  const auto R = static_cast<Eigen::Index>(tokens.size());
  if (R == 0) throw DataError("forward over an empty sequence");
  if (position_ids.size() != tokens.size())
    throw DataError("tokens and position_ids length mismatch");
  if (mask.rows() != R) throw DataError("visibility mask size mismatch");
  mask.validate();
  for (Token t : tokens)
    if (t < 0 || t >= w.dims.vocab)
      throw DataError("token out of range: " + std::to_string(t));
  for (int p : position_ids)
    if (p < 0 || p >= w.dims.max_pos)
      throw DataError("position id out of range: " + std::to_string(p));

  const int d = w.dims.d_model;
  const int heads = w.dims.n_heads;
  const int hd = w.dims.head_dim();
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

  MatF x(R, d);
  for (Eigen::Index r = 0; r < R; ++r)
    x.row(r) = w.tok_emb.row(tokens[r]) +
               sinusoidal_encoding(position_ids[r], d).transpose();

  MatF penalty = MatF::Zero(R, R);
  for (Eigen::Index q = 0; q < R; ++q)
    for (Eigen::Index k = 0; k < R; ++k)
      if (!mask.allowed(q, k)) penalty(q, k) = kMaskPenalty;

  for (const auto& layer : w.layers) {
    MatF xn = x;
    layer_norm_rows(xn, layer.ln1_scale, layer.ln1_bias);
    const MatF q = xn * layer.wq;
    const MatF k = xn * layer.wk;
    const MatF v = xn * layer.wv;
    MatF ctx(R, d);
    for (int h = 0; h < heads; ++h) {
      const auto qh = q.middleCols(h * hd, hd);
      const auto kh = k.middleCols(h * hd, hd);
      const auto vh = v.middleCols(h * hd, hd);
      MatF scores = (qh * kh.transpose()) * scale + penalty;
      for (Eigen::Index r = 0; r < R; ++r) {
        auto row = scores.row(r);
        softmax_inplace(row);
      }
      ctx.middleCols(h * hd, hd) = scores * vh;
    }
    x += ctx * layer.wo;

    MatF xf = x;
    layer_norm_rows(xf, layer.ln2_scale, layer.ln2_bias);
    MatF hidden = xf * layer.ffn_in;
    hidden.array().rowwise() += layer.ffn_in_bias.transpose().array();
    hidden = hidden.unaryExpr(&gelu);
    MatF ff = hidden * layer.ffn_out;
    ff.array().rowwise() += layer.ffn_out_bias.transpose().array();
    x += ff;
  }

  layer_norm_rows(x, w.final_scale, w.final_bias);

  ForwardOutput out;
  out.probs = x * w.unemb;
  out.top1.resize(static_cast<std::size_t>(R));
  for (Eigen::Index r = 0; r < R; ++r) {
    auto row = out.probs.row(r);
    softmax_inplace(row);
    const Eigen::Index best = argmax_lowest(row);
    out.top1[static_cast<std::size_t>(r)] = {static_cast<Token>(best),
                                             row(best)};
  }
  return out;
}

}  // namespace leap
