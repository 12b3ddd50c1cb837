#include "leap/markov.hpp"

#include "leap/numeric.hpp"
#include "leap/splitmix.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace leap {

namespace {

constexpr double kStochasticTol = 1e-9;

Token draw_from(const VecD& dist, SplitMix64& rng) {
  const double u = rng.next_unit();
  double cum = 0.0;
  for (Eigen::Index v = 0; v < dist.size(); ++v) {
    cum += dist(v);
    if (u < cum) return static_cast<Token>(v);
  }
  return static_cast<Token>(dist.size() - 1);
}

void check_distribution(const VecD& dist, const std::string& what) {
  if ((dist.array() < 0.0).any())
    throw DataError(what + " has a negative entry");
  if (std::abs(dist.sum() - 1.0) > kStochasticTol)
    throw DataError(what + " does not sum to 1");
}

}  // namespace

void MarkovSpec::validate() const {
  if (vocab < 2) throw DataError("markov vocab must be >= 2");
  if (initial.size() != vocab)
    throw DataError("initial distribution has wrong length");
  if (transition.rows() != vocab || transition.cols() != vocab)
    throw DataError("transition matrix has wrong shape");
  check_distribution(initial, "initial distribution");
  for (int r = 0; r < vocab; ++r)
    check_distribution(transition.row(r).transpose(),
                       "transition row " + std::to_string(r));
}

void NoisyCopySpec::validate() const {
  chain.validate();
  if (!(copy_weight >= 0.0 && copy_weight <= 1.0))
    throw DataError("copy_weight must be in [0,1]");
}

namespace {

MarkovSpec markov_from_json(const nlohmann::json& j) {
  MarkovSpec spec;
  spec.vocab = j.at("vocab_size").get<int>();
  const auto& init = j.at("initial");
  spec.initial.resize(static_cast<Eigen::Index>(init.size()));
  for (std::size_t i = 0; i < init.size(); ++i)
    spec.initial(static_cast<Eigen::Index>(i)) = init[i].get<double>();
  const auto& rows = j.at("transition");
  spec.transition.resize(static_cast<Eigen::Index>(rows.size()),
                         spec.initial.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != init.size())
      throw DataError("transition row " + std::to_string(r) +
                      " has wrong length");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      spec.transition(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
  }
  spec.validate();
  return spec;
}

nlohmann::ordered_json markov_to_json(const MarkovSpec& spec) {
  nlohmann::ordered_json j;
  j["vocab_size"] = spec.vocab;
  j["initial"] = std::vector<double>(spec.initial.data(),
                                     spec.initial.data() + spec.initial.size());
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < spec.vocab; ++r) {
    std::vector<double> row(spec.vocab);
    for (int c = 0; c < spec.vocab; ++c) row[c] = spec.transition(r, c);
    rows.push_back(row);
  }
  j["transition"] = std::move(rows);
  return j;
}

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spec file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }
}

}  // namespace

MarkovSpec load_markov_spec(const std::string& path) {
  const auto j = parse_json_file(path);
  if (j.contains("copy_weight"))
    throw DataError(path + " is a noisy-copy spec; the closed-form chain "
                           "backend cannot evaluate it");
  try {
    return markov_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad markov spec " + path + ": " + e.what());
  }
}

void save_markov_spec(const MarkovSpec& spec, const std::string& path) {
  spec.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot open spec file for writing: " + path);
  out << markov_to_json(spec).dump(2) << '\n';
}

NoisyCopySpec load_noisy_copy_spec(const std::string& path) {
  const auto j = parse_json_file(path);
  try {
    NoisyCopySpec spec;
    spec.chain = markov_from_json(j);
    spec.copy_weight = j.at("copy_weight").get<double>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad noisy-copy spec " + path + ": " + e.what());
  }
}

void save_noisy_copy_spec(const NoisyCopySpec& spec, const std::string& path) {
  spec.validate();
  auto j = markov_to_json(spec.chain);
  j["copy_weight"] = spec.copy_weight;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open spec file for writing: " + path);
  out << j.dump(2) << '\n';
}

std::vector<Token> sample_sequence(const MarkovSpec& spec, int length,
                                   std::uint64_t seed) {
  if (length < 1) throw DataError("sample length must be >= 1");
  SplitMix64 rng(seed);
  std::vector<Token> x(static_cast<std::size_t>(length));
  x[0] = draw_from(spec.initial, rng);
  for (int k = 1; k < length; ++k)
    x[static_cast<std::size_t>(k)] = draw_from(
        spec.transition.row(x[static_cast<std::size_t>(k - 1)]).transpose(),
        rng);
  return x;
}

std::vector<Token> sample_sequence(const NoisyCopySpec& spec, int length,
                                   std::uint64_t seed) {
  if (length < 1) throw DataError("sample length must be >= 1");
  SplitMix64 rng(seed);
  std::vector<Token> x(static_cast<std::size_t>(length));
  x[0] = draw_from(spec.chain.initial, rng);
  for (int k = 1; k < length; ++k) {
    VecD dist = (1.0 - spec.copy_weight) *
                spec.chain.transition.row(x[static_cast<std::size_t>(k - 1)])
                    .transpose();
    dist(x[0]) += spec.copy_weight;
    x[static_cast<std::size_t>(k)] = draw_from(dist, rng);
  }
  return x;
}

std::vector<Token> corrupt(const std::vector<Token>& x0, double alpha,
                           Token mask_id, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DataError("alpha must be in [0,1]");
  SplitMix64 rng(seed);
  std::vector<Token> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i)
    out[i] = rng.next_unit() < alpha ? x0[i] : mask_id;
  return out;
}

double sequence_prob(const MarkovSpec& spec, const std::vector<Token>& x) {
  if (x.empty()) return 1.0;
  double p = spec.initial(x[0]);
  for (std::size_t k = 1; k < x.size(); ++k)
    p *= spec.transition(x[k - 1], x[k]);
  return p;
}

double sequence_prob(const NoisyCopySpec& spec, const std::vector<Token>& x) {
  if (x.empty()) return 1.0;
  double p = spec.chain.initial(x[0]);
  for (std::size_t k = 1; k < x.size(); ++k) {
    double step = (1.0 - spec.copy_weight) * spec.chain.transition(x[k - 1], x[k]);
    if (x[k] == x[0]) step += spec.copy_weight;
    p *= step;
  }
  return p;
}

MarkovPowers::MarkovPowers(const MarkovSpec& spec, int max_len) : spec_(spec) {
  spec_.validate();
  if (max_len < 1) throw DataError("max_len must be >= 1");
  powers_.reserve(static_cast<std::size_t>(max_len) + 1);
  powers_.push_back(MatD::Identity(spec_.vocab, spec_.vocab));
  for (int d = 1; d <= max_len; ++d)
    powers_.push_back(powers_.back() * spec_.transition);
  marginals_.reserve(static_cast<std::size_t>(max_len) + 1);
  marginals_.push_back(spec_.initial.transpose());
  for (int i = 1; i <= max_len; ++i)
    marginals_.push_back(marginals_.back() * spec_.transition);
}

const MatD& MarkovPowers::power(int d) const {
  if (d < 0 || d >= static_cast<int>(powers_.size()))
    throw DataError("transition power out of cached range");
  return powers_[static_cast<std::size_t>(d)];
}

const RowVecD& MarkovPowers::marginal(int position) const {
  if (position < 0 || position >= static_cast<int>(marginals_.size()))
    throw DataError("marginal out of cached range");
  return marginals_[static_cast<std::size_t>(position)];
}

namespace {

/// Evidence on one side of a masked position: either a concrete token at a
/// distance, or nothing (open end).
struct Evidence {
  bool has = false;
  Token value = 0;
  int dist = 0;
};

VecD posterior_given(const MarkovPowers& powers, int position,
                     const Evidence& left, const Evidence& right) {
  const int v = powers.spec().vocab;
  RowVecD lvec = left.has ? RowVecD(powers.power(left.dist).row(left.value))
                          : powers.marginal(position);
  VecD post(v);
  if (right.has) {
    const MatD& pr = powers.power(right.dist);
    for (int t = 0; t < v; ++t) post(t) = lvec(t) * pr(t, right.value);
  } else {
    post = lvec.transpose();
  }
  return post;
}

VecD normalized(VecD post) {
  const double sum = post.sum();
  if (sum > 0.0) {
    post /= sum;
  } else {
    // Zero-probability evidence combination (possible only with zeros in the
    // transition matrix); fall back to uniform to keep decoding total.
    post.setConstant(1.0 / static_cast<double>(post.size()));
  }
  return post;
}

}  // namespace

std::map<int, VecD> exact_conditional(const MarkovPowers& powers,
                                      const std::vector<Token>& context) {
  const MarkovSpec& spec = powers.spec();
  const Token mask = spec.mask_id();
  const int L = static_cast<int>(context.size());
  if (L < 1) throw DataError("context must be nonempty");
  for (Token t : context)
    if (t < 0 || t > mask)
      throw DataError("context token out of range: " + std::to_string(t));

  std::map<int, VecD> out;
  for (int i = 0; i < L; ++i) {
    if (context[i] != mask) continue;
    Evidence left, right;
    for (int j = i - 1; j >= 0; --j)
      if (context[j] != mask) { left = {true, context[j], i - j}; break; }
    for (int j = i + 1; j < L; ++j)
      if (context[j] != mask) { right = {true, context[j], j - i}; break; }
    out.emplace(i, normalized(posterior_given(powers, i, left, right)));
  }
  return out;
}

std::map<int, VecD> exact_conditional(const MarkovSpec& spec,
                                      const std::vector<Token>& context) {
  MarkovPowers powers(spec, std::max<int>(1, static_cast<int>(context.size())));
  return exact_conditional(powers, context);
}

namespace {

template <typename JointProb>
std::map<int, VecD> brute_force_impl(int vocab, Token mask,
                                     const std::vector<Token>& context,
                                     JointProb&& joint) {
  std::vector<int> masked;
  for (int i = 0; i < static_cast<int>(context.size()); ++i)
    if (context[i] == mask) masked.push_back(i);
  if (masked.empty()) return {};

  const double bits =
      static_cast<double>(masked.size()) * std::log2(static_cast<double>(vocab));
  if (bits > 24.0 + 1e-9)
    throw BoundError("brute-force enumeration bound exceeded: " +
                     std::to_string(masked.size()) + " masked positions over " +
                     std::to_string(vocab) + " tokens");

  std::map<int, VecD> acc;
  for (int i : masked) acc.emplace(i, VecD::Zero(vocab));
  double total = 0.0;

  std::vector<Token> filled = context;
  std::vector<int> odometer(masked.size(), 0);
  for (int i : masked) filled[static_cast<std::size_t>(i)] = 0;
  while (true) {
    const double w = joint(filled);
    total += w;
    for (std::size_t k = 0; k < masked.size(); ++k)
      acc.at(masked[k])(filled[static_cast<std::size_t>(masked[k])]) += w;
    std::size_t k = 0;
    for (; k < odometer.size(); ++k) {
      if (++odometer[k] < vocab) {
        filled[static_cast<std::size_t>(masked[k])] =
            static_cast<Token>(odometer[k]);
        break;
      }
      odometer[k] = 0;
      filled[static_cast<std::size_t>(masked[k])] = 0;
    }
    if (k == odometer.size()) break;
  }

  for (auto& [pos, dist] : acc) dist = normalized(std::move(dist));
  return acc;
}

}  // namespace

std::map<int, VecD> brute_force_conditional(const MarkovSpec& spec,
                                            const std::vector<Token>& context) {
  spec.validate();
  return brute_force_impl(spec.vocab, spec.mask_id(), context,
                          [&spec](const std::vector<Token>& x) {
                            return sequence_prob(spec, x);
                          });
}

std::map<int, VecD> brute_force_conditional(const NoisyCopySpec& spec,
                                            const std::vector<Token>& context) {
  spec.validate();
  return brute_force_impl(spec.chain.vocab, spec.chain.mask_id(), context,
                          [&spec](const std::vector<Token>& x) {
                            return sequence_prob(spec, x);
                          });
}

bool markov_converged(const MarkovPowers& powers,
                      const std::vector<Token>& context, int position,
                      const std::map<int, CandidateSet>& candidates) {
  const MarkovSpec& spec = powers.spec();
  const Token mask = spec.mask_id();
  const int L = static_cast<int>(context.size());
  if (position < 0 || position >= L || context[position] != mask)
    throw DataError("markov_converged: position must be masked");

  int lpos = -1, rpos = L;
  for (int j = position - 1; j >= 0; --j)
    if (context[j] != mask) { lpos = j; break; }
  for (int j = position + 1; j < L; ++j)
    if (context[j] != mask) { rpos = j; break; }

  // Filling a subset of masked positions changes this position's posterior
  // only through the nearest filled neighbor on each side, so the subset
  // lattice collapses to all (left evidence, right evidence) pairs.
  std::vector<Evidence> lefts, rights;
  lefts.push_back(lpos >= 0 ? Evidence{true, context[lpos], position - lpos}
                            : Evidence{});
  for (int j = lpos + 1; j < position; ++j) {
    auto it = candidates.find(j);
    if (it == candidates.end()) continue;
    for (const Candidate& c : it->second.tokens)
      lefts.push_back({true, c.token, position - j});
  }
  rights.push_back(rpos < L ? Evidence{true, context[rpos], rpos - position}
                            : Evidence{});
  for (int j = position + 1; j < rpos; ++j) {
    auto it = candidates.find(j);
    if (it == candidates.end()) continue;
    for (const Candidate& c : it->second.tokens)
      rights.push_back({true, c.token, j - position});
  }

  const VecD base = posterior_given(powers, position, lefts[0], rights[0]);
  const Eigen::Index target = argmax_lowest(base);
  for (const Evidence& le : lefts) {
    for (const Evidence& re : rights) {
      const VecD post = posterior_given(powers, position, le, re);
      if (argmax_lowest(post) != target) return false;
    }
  }
  return true;
}

}  // namespace leap
