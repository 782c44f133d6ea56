#include "twkit/missing.hpp"

#include <stdexcept>

#include "twkit/rng.hpp"

namespace twkit {

std::pair<Table, MaskMatrix> inject_missing(const Table& table,
                                            const std::vector<std::string>& features, double rate,
                                            std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw std::invalid_argument("inject_missing: rate must lie in (0, 1)");
  }
  Table out = table;
  const std::size_t n = table.size();
  const std::size_t k = round_half_up(rate * static_cast<double>(n));
  for (const auto& name : features) {
    const std::size_t c = table.schema().require(name);
    if (table.missing_count(c) > 0) {
      throw std::invalid_argument("inject_missing: feature '" + name + "' already has missing cells");
    }
    Rng rng(derive_seed(seed, name));
    std::vector<std::size_t> idx = shuffled_indices(n, rng);
    for (std::size_t i = 0; i < k; ++i) out.set(idx[i], c, Cell::missing());
  }
  MaskMatrix mask = MaskMatrix::of(out);
  return {std::move(out), std::move(mask)};
}

}  // namespace twkit
