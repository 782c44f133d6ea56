#pragma once

#include <cstddef>

namespace twkit {

/// A contiguous run of columns, e.g. the one-hot columns of one attribute.
struct Block {
  std::size_t offset = 0;
  std::size_t width = 0;
  bool operator==(const Block&) const = default;
};

}  // namespace twkit
