#include "twkit/split.hpp"

#include <algorithm>
#include <stdexcept>

#include "twkit/rng.hpp"

namespace twkit {

namespace {

std::vector<std::vector<std::size_t>> members_by_class(const Table& table) {
  std::vector<std::vector<std::size_t>> members(table.schema().class_count());
  for (std::size_t r = 0; r < table.size(); ++r) members[table.label_of(r)].push_back(r);
  return members;
}

}  // namespace

SplitIndices stratified_split_indices(const Table& table, double test_fraction, std::uint64_t seed) {
  if (table.empty()) throw std::invalid_argument("split_stratified: empty table");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split_stratified: test_fraction must lie in [0, 1)");
  }
  const auto tokens = table.schema().class_tokens();
  auto members = members_by_class(table);
  SplitIndices out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& rows = members[c];
    if (rows.empty()) continue;
    Rng rng(derive_seed(seed, "split/" + tokens[c]));
    rng.shuffle(rows);
    std::size_t n_test = rows.size() == 1 ? 0 : round_half_up(test_fraction * static_cast<double>(rows.size()));
    n_test = std::min(n_test, rows.size() - 1);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Table, Table> split_stratified(const Table& table, double test_fraction, std::uint64_t seed) {
  const auto idx = stratified_split_indices(table, test_fraction, seed);
  return {table.subset(idx.train), table.subset(idx.test)};
}

std::vector<std::size_t> stratified_folds(const Table& table, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
  if (table.empty()) throw std::invalid_argument("stratified_folds: empty table");
  const auto tokens = table.schema().class_tokens();
  auto members = members_by_class(table);
  std::vector<std::size_t> fold(table.size(), 0);
  std::size_t next = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& rows = members[c];
    Rng rng(derive_seed(seed, "fold/" + tokens[c]));
    rng.shuffle(rows);
    // Round-robin continues across classes so small classes spread over folds.
    for (std::size_t r : rows) fold[r] = next++ % folds;
  }
  return fold;
}

}  // namespace twkit
