#pragma once

#include "leap/error.hpp"
#include "leap/superposition.hpp"
#include "leap/types.hpp"
#include "leap/vocab.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace leap {

/// First-order chain over real tokens 0..V-1. The decoding vocabulary adds
/// one mask id at V, so distributions returned to decoders have length V+1
/// with zero mass on the mask.
struct MarkovSpec {
  int vocab = 0;       // real tokens, mask excluded
  VecD initial;        // length V, sums to 1
  MatD transition;     // V x V, rows sum to 1

  void validate() const;
  Token mask_id() const { return vocab; }
  Vocab decode_vocab() const { return Vocab{vocab + 1, vocab, {}}; }
};

/// Markov chain with an extra pull toward the first token: conditionally on
/// x[k-1] and x[0], x[k] follows (1-copy_weight) * P[x[k-1], .] plus
/// copy_weight on x[0]. Long-range by construction; only brute-force
/// conditionals apply.
struct NoisyCopySpec {
  MarkovSpec chain;
  double copy_weight = 0.0;

  void validate() const;
};

MarkovSpec load_markov_spec(const std::string& path);
void save_markov_spec(const MarkovSpec& spec, const std::string& path);
NoisyCopySpec load_noisy_copy_spec(const std::string& path);
void save_noisy_copy_spec(const NoisyCopySpec& spec, const std::string& path);

/// Chain sample: x[0] ~ initial, x[k] ~ P[x[k-1], .], inverse-CDF on one
/// SplitMix64 stream.
std::vector<Token> sample_sequence(const MarkovSpec& spec, int length,
                                   std::uint64_t seed);
std::vector<Token> sample_sequence(const NoisyCopySpec& spec, int length,
                                   std::uint64_t seed);

/// Independent per-position corruption: keep with probability alpha,
/// otherwise replace with mask_id.
std::vector<Token> corrupt(const std::vector<Token>& x0, double alpha,
                           Token mask_id, std::uint64_t seed);

/// Joint probability of a fully observed sequence under the chain.
double sequence_prob(const MarkovSpec& spec, const std::vector<Token>& x);
double sequence_prob(const NoisyCopySpec& spec, const std::vector<Token>& x);

/// Cache of transition powers P^d and start-propagated marginals pi0^T P^i.
/// Built eagerly up to max_len; immutable afterwards, safe to share.
class MarkovPowers {
 public:
  MarkovPowers(const MarkovSpec& spec, int max_len);

  const MatD& power(int d) const;
  const RowVecD& marginal(int position) const;
  const MarkovSpec& spec() const { return spec_; }

 private:
  MarkovSpec spec_;
  std::vector<MatD> powers_;
  std::vector<RowVecD> marginals_;
};

/// Exact posterior p(x_i = v | observed tokens) for every masked position of
/// `context`, in closed form via the nearest observed neighbors: for a run
/// bounded by a at distance dl and b at distance dr,
/// p(x_i = v) ~ P^dl[a, v] * P^dr[v, b]; an unbounded left end uses the
/// start-propagated marginal, an unbounded right end an all-ones factor.
/// Returned vectors have length V (real tokens only) and sum to 1.
std::map<int, VecD> exact_conditional(const MarkovSpec& spec,
                                      const std::vector<Token>& context);
std::map<int, VecD> exact_conditional(const MarkovPowers& powers,
                                      const std::vector<Token>& context);

/// Enumerates every completion of the masked positions and marginalizes the
/// joint weight. Requires (#masked) * log2(V) <= 24.
std::map<int, VecD> brute_force_conditional(const MarkovSpec& spec,
                                            const std::vector<Token>& context);
std::map<int, VecD> brute_force_conditional(const NoisyCopySpec& spec,
                                            const std::vector<Token>& context);

/// True iff the greedy token at masked position i is invariant under every
/// assignment that fills any subset of the other masked positions with one
/// of their candidates. Exact for the chain: collapses the subset lattice to
/// the possible nearest-evidence pairs, so there is no enumeration bound.
bool markov_converged(const MarkovPowers& powers,
                      const std::vector<Token>& context, int position,
                      const std::map<int, CandidateSet>& candidates);

}  // namespace leap
