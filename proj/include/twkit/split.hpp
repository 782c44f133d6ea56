#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "twkit/table.hpp"

namespace twkit {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class proportional split: each class contributes round(n_c * fraction)
/// rows to the test side, except single-member classes which stay in train.
/// Indices are returned in ascending order.
SplitIndices stratified_split_indices(const Table& table, double test_fraction, std::uint64_t seed);

/// (train, test) tables from stratified_split_indices.
std::pair<Table, Table> split_stratified(const Table& table, double test_fraction, std::uint64_t seed);

/// Stratified k-fold assignment; fold f's test rows are those with fold == f.
std::vector<std::size_t> stratified_folds(const Table& table, std::size_t folds, std::uint64_t seed);

}  // namespace twkit
