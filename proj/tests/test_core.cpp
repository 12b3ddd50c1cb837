#include "leap/sequence.hpp"

#include "leap/error.hpp"

#include <doctest.h>

using namespace leap;

namespace {
const Vocab kVocab{10, 9, {}};  // ids 0..8 real, 9 is the mask
}

TEST_CASE("new_state appends masks after the prompt") {
  const SequenceState st = new_state({3, 1}, 4, 4, kVocab);
  CHECK(st.tokens == std::vector<Token>{3, 1, 9, 9, 9, 9});
  CHECK(st.masked == std::set<int>{2, 3, 4, 5});
  CHECK(st.prompt_len == 2);
  CHECK(st.step == 0);
}

TEST_CASE("new_state with an empty prompt masks one full block") {
  const SequenceState st = new_state({}, 32, 32, kVocab);
  CHECK(st.seq_len() == 32);
  CHECK(st.masked.size() == 32);
}

TEST_CASE("new_state rejects a prompt containing the mask token") {
  CHECK_THROWS_AS(new_state({1, 9}, 4, 4, kVocab), DataError);
}

TEST_CASE("new_state rejects gen_len not a multiple of the block size") {
  CHECK_THROWS_AS(new_state({1}, 6, 4, kVocab), DataError);
}

TEST_CASE("active_block returns the earliest incomplete block") {
  SUBCASE("first block fully decoded") {
    std::vector<Token> tokens(8, 0);
    tokens[5] = 9;
    tokens[6] = 9;
    const SequenceState st = state_from_tokens(tokens, 0, 4, kVocab);
    const BlockSpan span = active_block(st);
    CHECK(span.begin == 4);
    CHECK(span.end == 8);
  }
  SUBCASE("earliest block wins even when later blocks are masked") {
    std::vector<Token> tokens(8, 0);
    tokens[0] = 9;
    tokens[5] = 9;
    const SequenceState st = state_from_tokens(tokens, 0, 4, kVocab);
    const BlockSpan span = active_block(st);
    CHECK(span.begin == 0);
    CHECK(span.end == 4);
  }
  SUBCASE("no masked positions signals completion") {
    const std::vector<Token> tokens(8, 0);
    const SequenceState st = state_from_tokens(tokens, 0, 4, kVocab);
    CHECK_THROWS_AS(active_block(st), DataError);
  }
}

TEST_CASE("active_block offsets blocks by the prompt") {
  const SequenceState st = new_state({3, 1}, 4, 4, kVocab);
  const BlockSpan span = active_block(st);
  CHECK(span.begin == 2);
  CHECK(span.end == 6);
}

TEST_CASE("apply_decodes writes tokens and advances the step") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  apply_decodes(st, {{0, 2}}, kVocab);
  CHECK(st.tokens == std::vector<Token>{2, 9});
  CHECK(st.masked == std::set<int>{1});
  CHECK(st.step == 1);
}

TEST_CASE("apply_decodes rejects an empty step") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  CHECK_THROWS_AS(apply_decodes(st, {}, kVocab), DataError);
}

TEST_CASE("apply_decodes rejects duplicate positions") {
  SequenceState st = new_state({}, 2, 2, kVocab);
  CHECK_THROWS_AS(apply_decodes(st, {{0, 2}, {0, 3}}, kVocab), DataError);
}

TEST_CASE("apply_decodes rejects unmasked positions and mask tokens") {
  SequenceState st = new_state({1}, 2, 2, kVocab);
  CHECK_THROWS_AS(apply_decodes(st, {{0, 2}}, kVocab), DataError);
  CHECK_THROWS_AS(apply_decodes(st, {{1, 9}}, kVocab), DataError);
}

TEST_CASE("state_from_tokens recovers the masked set") {
  const std::vector<Token> tokens{4, 9, 2, 9};
  const SequenceState st = state_from_tokens(tokens, 0, 4, kVocab);
  CHECK(st.masked == std::set<int>{1, 3});
  CHECK_THROWS_AS(state_from_tokens({9, 1, 2, 3}, 1, 3, kVocab), DataError);
}
