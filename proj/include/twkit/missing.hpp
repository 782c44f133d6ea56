#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "twkit/table.hpp"

namespace twkit {

/// Removes exactly round(rate * n_rows) cells from each named feature.
///
/// Cells are picked uniformly without replacement, independently per feature,
/// by a generator seeded from (seed, feature name). Other cells are untouched.
/// Throws std::invalid_argument if rate is outside (0, 1), a feature is
/// unknown, or a named feature already has missing cells.
std::pair<Table, MaskMatrix> inject_missing(const Table& table,
                                            const std::vector<std::string>& features, double rate,
                                            std::uint64_t seed);

}  // namespace twkit
