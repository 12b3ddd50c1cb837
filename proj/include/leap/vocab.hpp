#pragma once

#include "leap/error.hpp"
#include "leap/types.hpp"

#include <string>
#include <vector>

namespace leap {

/// Token vocabulary with one id reserved as the mask marker.
struct Vocab {
  int size = 0;
  Token mask_id = 0;
  std::vector<std::string> glyphs;  // optional display strings, size 0 or V

  void validate() const {
    if (size < 2) throw DataError("vocab size must be >= 2");
    if (mask_id < 0 || mask_id >= size)
      throw DataError("mask_id out of range");
    if (!glyphs.empty() && static_cast<int>(glyphs.size()) != size)
      throw DataError("glyphs must be empty or one per token");
  }

  bool is_mask(Token t) const { return t == mask_id; }
};

}  // namespace leap
