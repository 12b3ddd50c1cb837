#include "leap/backend/weights.hpp"

#include "leap/error.hpp"
#include "leap/splitmix.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace leap {

namespace {

constexpr char kMagic[6] = {'L', 'E', 'A', 'P', 'W', '1'};

void visit_vec(VecF& v, int fan,
               const std::function<void(float*, std::size_t, int, int)>& fn) {
  fn(v.data(), static_cast<std::size_t>(v.size()), fan, fan);
}

void visit_mat(MatF& m,
               const std::function<void(float*, std::size_t, int, int)>& fn) {
  fn(m.data(), static_cast<std::size_t>(m.size()),
     static_cast<int>(m.rows()), static_cast<int>(m.cols()));
}

}  // namespace

void ModelDims::validate() const {
  if (d_model < 1 || n_heads < 1 || n_layers < 1 || d_ffn < 1 || max_pos < 1)
    throw DataError("model dims must be positive");
  if (vocab < 2) throw DataError("vocab must be >= 2");
  if (d_model % n_heads != 0)
    throw DataError("d_model must be divisible by n_heads");
}

void for_each_tensor(
    DenoiserWeights& w,
    const std::function<void(float*, std::size_t, int, int)>& fn) {
  visit_mat(w.tok_emb, fn);
  for (auto& l : w.layers) {
    visit_vec(l.ln1_scale, w.dims.d_model, fn);
    visit_vec(l.ln1_bias, w.dims.d_model, fn);
    visit_vec(l.ln2_scale, w.dims.d_model, fn);
    visit_vec(l.ln2_bias, w.dims.d_model, fn);
    visit_mat(l.wq, fn);
    visit_mat(l.wk, fn);
    visit_mat(l.wv, fn);
    visit_mat(l.wo, fn);
    visit_mat(l.ffn_in, fn);
    visit_vec(l.ffn_in_bias, w.dims.d_ffn, fn);
    visit_mat(l.ffn_out, fn);
    visit_vec(l.ffn_out_bias, w.dims.d_model, fn);
  }
  visit_vec(w.final_scale, w.dims.d_model, fn);
  visit_vec(w.final_bias, w.dims.d_model, fn);
  visit_mat(w.unemb, fn);
}

namespace {

DenoiserWeights allocate(const ModelDims& dims) {
  dims.validate();
  DenoiserWeights w;
  w.dims = dims;
  w.tok_emb.resize(dims.vocab, dims.d_model);
  w.layers.resize(dims.n_layers);
  for (auto& l : w.layers) {
    l.ln1_scale.resize(dims.d_model);
    l.ln1_bias.resize(dims.d_model);
    l.ln2_scale.resize(dims.d_model);
    l.ln2_bias.resize(dims.d_model);
    l.wq.resize(dims.d_model, dims.d_model);
    l.wk.resize(dims.d_model, dims.d_model);
    l.wv.resize(dims.d_model, dims.d_model);
    l.wo.resize(dims.d_model, dims.d_model);
    l.ffn_in.resize(dims.d_model, dims.d_ffn);
    l.ffn_in_bias.resize(dims.d_ffn);
    l.ffn_out.resize(dims.d_ffn, dims.d_model);
    l.ffn_out_bias.resize(dims.d_model);
  }
  w.final_scale.resize(dims.d_model);
  w.final_bias.resize(dims.d_model);
  w.unemb.resize(dims.d_model, dims.vocab);
  return w;
}

}  // namespace

DenoiserWeights seeded_weights(std::uint64_t seed, const ModelDims& dims) {
  DenoiserWeights w = allocate(dims);
  SplitMix64 rng(seed);
  for_each_tensor(w, [&rng](float* data, std::size_t n, int fan_in,
                            int fan_out) {
    const double a = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.next_unit();
      data[i] = static_cast<float>(a * (2.0 * u - 1.0));
    }
  });
  return w;
}

void save_weights(const DenoiserWeights& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open weight file for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t header[7] = {
      static_cast<std::uint32_t>(w.dims.d_model),
      static_cast<std::uint32_t>(w.dims.n_heads),
      static_cast<std::uint32_t>(w.dims.n_layers),
      static_cast<std::uint32_t>(w.dims.d_ffn),
      static_cast<std::uint32_t>(w.dims.vocab),
      static_cast<std::uint32_t>(w.dims.max_pos),
      0u,
  };
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  auto& mutable_w = const_cast<DenoiserWeights&>(w);
  for_each_tensor(mutable_w, [&out](float* data, std::size_t n, int, int) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * sizeof(float)));
  });
  if (!out) throw DataError("short write to weight file: " + path);
}

DenoiserWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open weight file: " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("bad magic in weight file: " + path);
  std::uint32_t header[7];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw DataError("truncated weight file header: " + path);
  if (header[6] != 0) throw DataError("reserved header field must be 0");
  ModelDims dims;
  dims.d_model = static_cast<int>(header[0]);
  dims.n_heads = static_cast<int>(header[1]);
  dims.n_layers = static_cast<int>(header[2]);
  dims.d_ffn = static_cast<int>(header[3]);
  dims.vocab = static_cast<int>(header[4]);
  dims.max_pos = static_cast<int>(header[5]);
  dims.validate();
  DenoiserWeights w = allocate(dims);
  for_each_tensor(w, [&in, &path](float* data, std::size_t n, int, int) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (!in || in.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
      throw DataError("truncated weight file: " + path);
  });
  // The format is exact: trailing bytes mean a corrupt or mismatched file.
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0)
    throw DataError("trailing bytes in weight file: " + path);
  for_each_tensor(w, [&path](float* data, std::size_t n, int, int) {
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(data[i]))
        throw DataError("non-finite value in weight file: " + path);
  });
  return w;
}

bool weights_equal(const DenoiserWeights& a, const DenoiserWeights& b) {
  if (std::memcmp(&a.dims, &b.dims, sizeof(ModelDims)) != 0) return false;
  bool equal = true;
  auto& ma = const_cast<DenoiserWeights&>(a);
  auto& mb = const_cast<DenoiserWeights&>(b);
  std::vector<std::pair<float*, std::size_t>> ta, tb;
  for_each_tensor(ma, [&ta](float* d, std::size_t n, int, int) {
    ta.emplace_back(d, n);
  });
  for_each_tensor(mb, [&tb](float* d, std::size_t n, int, int) {
    tb.emplace_back(d, n);
  });
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].second != tb[i].second) return false;
    if (std::memcmp(ta[i].first, tb[i].first,
                    ta[i].second * sizeof(float)) != 0)
      equal = false;
  }
  return equal;
}

}  // namespace leap
