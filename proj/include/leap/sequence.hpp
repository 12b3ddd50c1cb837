#pragma once

#include "leap/types.hpp"
#include "leap/vocab.hpp"

#include <map>
#include <set>
#include <vector>

namespace leap {

/// Half-open span of absolute positions.
struct BlockSpan {
  int begin = 0;
  int end = 0;
  bool contains(int p) const { return p >= begin && p < end; }
};

/// Partially denoised sequence. Positions are absolute (prompt included);
/// `masked` only ever holds generation-region positions and shrinks
/// monotonically: a decoded token is never re-masked.
struct SequenceState {
  int prompt_len = 0;
  std::vector<Token> tokens;
  std::set<int> masked;
  int step = 0;
  int block_size = 1;
  std::map<int, VecD> prev_dists;  // cache of last-forward distributions

  int seq_len() const { return static_cast<int>(tokens.size()); }
  int gen_len() const { return seq_len() - prompt_len; }
};

/// prompt followed by gen_len mask tokens, everything masked, step 0.
SequenceState new_state(const std::vector<Token>& prompt, int gen_len,
                        int block_size, const Vocab& vocab);

/// State over an existing (e.g. corrupted) sequence: masked positions are the
/// mask-token positions; prompt positions must be unmasked.
SequenceState state_from_tokens(const std::vector<Token>& tokens,
                                int prompt_len, int block_size,
                                const Vocab& vocab);

/// Earliest block of the generation region that still has a masked position.
BlockSpan active_block(const SequenceState& state);

/// One decode step: writes the tokens, unmasks the positions, bumps `step`.
/// Every position must currently be masked, every token a real token, and the
/// set nonempty (each step must make progress).
void apply_decodes(SequenceState& state,
                   const std::vector<std::pair<int, Token>>& events,
                   const Vocab& vocab);

}  // namespace leap
