#pragma once

#include <span>
#include <vector>

#include "agrimeta/datagen/sample.hpp"

namespace agrimeta::evalx {

struct Fold {
  int test_year = 0;
  std::vector<std::size_t> train;  // ascending indices
  std::vector<std::size_t> test;   // ascending indices
};

// One fold per distinct year, in ascending year order. Throws ValidationError
// with fewer than two distinct years.
std::vector<Fold> loocv_splits_by_year(std::span<const int> years);
std::vector<Fold> loocv_splits_by_year(std::span<const datagen::Sample> samples);

}  // namespace agrimeta::evalx
