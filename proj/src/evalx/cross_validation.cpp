#include "agrimeta/evalx/cross_validation.hpp"

#include <set>

#include "agrimeta/error.hpp"

namespace agrimeta::evalx {

std::vector<Fold> loocv_splits_by_year(std::span<const int> years) {
  const std::set<int> distinct(years.begin(), years.end());
  if (distinct.size() < 2) {
    throw ValidationError("leave-one-year-out needs at least 2 distinct years, got " +
                          std::to_string(distinct.size()));
  }
  std::vector<Fold> folds;
  for (int y : distinct) {
    Fold f;
    f.test_year = y;
    for (std::size_t i = 0; i < years.size(); ++i) (years[i] == y ? f.test : f.train).push_back(i);
    folds.push_back(std::move(f));
  }
  return folds;
}

std::vector<Fold> loocv_splits_by_year(std::span<const datagen::Sample> samples) {
  std::vector<int> years;
  years.reserve(samples.size());
  for (const auto& s : samples) years.push_back(s.meta.year);
  return loocv_splits_by_year(years);
}

}  // namespace agrimeta::evalx
