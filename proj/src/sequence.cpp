#include "leap/sequence.hpp"

#include "leap/error.hpp"

#include <string>

namespace leap {

SequenceState new_state(const std::vector<Token>& prompt, int gen_len,
                        int block_size, const Vocab& vocab) {
  vocab.validate();
  if (gen_len < 1) throw DataError("gen_len must be >= 1");
  if (block_size < 1) throw DataError("block_size must be >= 1");
  if (gen_len % block_size != 0)
    throw DataError("gen_len must be a multiple of block_size");
  for (Token t : prompt) {
    if (t < 0 || t >= vocab.size)
      throw DataError("prompt token out of range: " + std::to_string(t));
    if (vocab.is_mask(t)) throw DataError("prompt contains the mask token");
  }
  SequenceState st;
  st.prompt_len = static_cast<int>(prompt.size());
  st.block_size = block_size;
  st.tokens = prompt;
  st.tokens.resize(prompt.size() + gen_len, vocab.mask_id);
  for (int p = st.prompt_len; p < st.seq_len(); ++p) st.masked.insert(p);
  return st;
}

SequenceState state_from_tokens(const std::vector<Token>& tokens,
                                int prompt_len, int block_size,
                                const Vocab& vocab) {
  vocab.validate();
  if (prompt_len < 0 || prompt_len >= static_cast<int>(tokens.size()))
    throw DataError("prompt_len out of range");
  if (block_size < 1) throw DataError("block_size must be >= 1");
  const int gen = static_cast<int>(tokens.size()) - prompt_len;
  if (gen % block_size != 0)
    throw DataError("generation region must be a multiple of block_size");
  SequenceState st;
  st.prompt_len = prompt_len;
  st.block_size = block_size;
  st.tokens = tokens;
  for (int p = 0; p < st.seq_len(); ++p) {
    const Token t = tokens[p];
    if (t < 0 || t >= vocab.size)
      throw DataError("token out of range: " + std::to_string(t));
    if (vocab.is_mask(t)) {
      if (p < prompt_len) throw DataError("prompt contains the mask token");
      st.masked.insert(p);
    }
  }
  return st;
}

BlockSpan active_block(const SequenceState& state) {
  if (state.masked.empty())
    throw DataError("no masked positions: decoding already complete");
  const int first = *state.masked.begin();
  const int block = (first - state.prompt_len) / state.block_size;
  BlockSpan span;
  span.begin = state.prompt_len + block * state.block_size;
  span.end = span.begin + state.block_size;
  return span;
}

void apply_decodes(SequenceState& state,
                   const std::vector<std::pair<int, Token>>& events,
                   const Vocab& vocab) {
  if (events.empty())
    throw DataError("empty decode step: every step must make progress");
  std::set<int> seen;
  for (const auto& [pos, token] : events) {
    if (!seen.insert(pos).second)
      throw DataError("duplicate decode position: " + std::to_string(pos));
    if (state.masked.count(pos) == 0)
      throw DataError("decode at unmasked position: " + std::to_string(pos));
    if (vocab.is_mask(token))
      throw DataError("cannot decode to the mask token");
    if (token < 0 || token >= vocab.size)
      throw DataError("decode token out of range: " + std::to_string(token));
  }
  for (const auto& [pos, token] : events) {
    state.tokens[pos] = token;
    state.masked.erase(pos);
  }
  ++state.step;
}

}  // namespace leap
