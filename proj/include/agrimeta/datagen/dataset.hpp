#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agrimeta/cropsim/simulator.hpp"
#include "agrimeta/cropsim/types.hpp"
#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/datagen/scenario.hpp"

namespace agrimeta::datagen {

class WeatherStore {
 public:
  void add(cropsim::WeatherSeries series);
  bool contains(const std::string& location, int year) const;
  const cropsim::WeatherSeries& get(const std::string& location, int year) const;
  std::vector<std::string> locations() const;
  std::size_t size() const { return series_.size(); }

  // Shipped stations (first n) x years, built by the seeded generator.
  static WeatherStore synthetic(int n_locations, const std::vector<int>& years, std::uint64_t seed);
  // All <location>_<year>.csv files in a directory.
  static WeatherStore load_directory(const std::filesystem::path& dir);

 private:
  std::map<std::pair<std::string, int>, cropsim::WeatherSeries> series_;
};

class SoilLibrary {
 public:
  SoilLibrary() = default;
  explicit SoilLibrary(const std::vector<cropsim::SoilType>& soils);
  static SoilLibrary shipped();

  bool contains(int code) const { return soils_.count(code) != 0; }
  const cropsim::SoilType& get(int code) const;
  std::vector<int> codes() const;

 private:
  std::map<int, cropsim::SoilType> soils_;
};

struct GenerateOptions {
  int workers = 0;  // 0 = OpenMP default
  cropsim::CropParameters params{};
};

// One Sample per scenario, in scenario order, independent of worker count.
std::vector<Sample> generate_dataset(std::span<const Scenario> scenarios, const WeatherStore& weather,
                                     const SoilLibrary& soils, const GenerateOptions& options = {});

// Single-threaded reference path with identical output.
std::vector<Sample> generate_dataset_serial(std::span<const Scenario> scenarios,
                                            const WeatherStore& weather, const SoilLibrary& soils,
                                            const GenerateOptions& options = {});

struct DomainSplit {
  std::vector<Sample> peat;   // codes 200-299
  std::vector<Sample> sand;   // codes 300-399
  std::vector<Sample> other;
};

DomainSplit split_by_soil_domain(std::vector<Sample> samples);

std::vector<Sample> exclude_years(std::vector<Sample> samples, const std::set<int>& banned_years);

std::set<int> years_of(std::span<const Sample> samples);

// Random subset of `count` items from `pool` without replacement (seeded);
// order follows the shuffled draw.
std::vector<std::size_t> draw_indices(std::size_t pool, std::size_t count, std::uint64_t seed);
std::vector<Sample> take(std::span<const Sample> samples, std::span<const std::size_t> indices);

}  // namespace agrimeta::datagen
