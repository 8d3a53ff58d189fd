#include "agrimeta/datagen/dataset.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>

#include <omp.h>

#include "agrimeta/cropsim/io.hpp"
#include "agrimeta/cropsim/soil_library.hpp"
#include "agrimeta/cropsim/weather_generator.hpp"
#include "agrimeta/error.hpp"

namespace agrimeta::datagen {

void WeatherStore::add(cropsim::WeatherSeries series) {
  cropsim::validate(series);
  auto key = std::make_pair(series.location_id, series.year);
  series_.insert_or_assign(std::move(key), std::move(series));
}

bool WeatherStore::contains(const std::string& location, int year) const {
  return series_.count({location, year}) != 0;
}

const cropsim::WeatherSeries& WeatherStore::get(const std::string& location, int year) const {
  const auto it = series_.find({location, year});
  if (it == series_.end()) {
    throw ValidationError("no weather for location " + location + " year " + std::to_string(year));
  }
  return it->second;
}

std::vector<std::string> WeatherStore::locations() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : series_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

WeatherStore WeatherStore::synthetic(int n_locations, const std::vector<int>& years,
                                     std::uint64_t seed) {
  const auto& climates = cropsim::shipped_climates();
  if (n_locations < 1 || n_locations > static_cast<int>(climates.size())) {
    throw ValidationError("synthetic weather supports 1.." + std::to_string(climates.size()) +
                          " locations");
  }
  WeatherStore store;
  for (int i = 0; i < n_locations; ++i) {
    for (int year : years) {
      store.add(cropsim::generate_weather(climates[static_cast<std::size_t>(i)], year, seed));
    }
  }
  return store;
}

WeatherStore WeatherStore::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("weather directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  WeatherStore store;
  for (const auto& f : files) store.add(cropsim::read_weather_csv(f));
  return store;
}

SoilLibrary::SoilLibrary(const std::vector<cropsim::SoilType>& soils) {
  for (const auto& s : soils) {
    cropsim::validate(s);
    soils_.insert_or_assign(s.code, s);
  }
}

SoilLibrary SoilLibrary::shipped() { return SoilLibrary(cropsim::shipped_soil_library()); }

const cropsim::SoilType& SoilLibrary::get(int code) const {
  const auto it = soils_.find(code);
  if (it == soils_.end()) throw ValidationError("soil code " + std::to_string(code) + " not in library");
  return it->second;
}

std::vector<int> SoilLibrary::codes() const {
  std::vector<int> out;
  for (const auto& [code, _] : soils_) out.push_back(code);
  return out;
}

namespace {

struct SoilCache {
  std::unordered_map<int, cropsim::SoilProfile> profiles;
  std::unordered_map<int, std::vector<double>> encodings;
};

std::string identify(const Scenario& s) {
  return "scenario (location " + s.location_id + ", year " + std::to_string(s.year) + ", soil " +
         std::to_string(s.soil_code) + ", replicate " + std::to_string(s.replicate_index) + ")";
}

SoilCache prepare(std::span<const Scenario> scenarios, const WeatherStore& weather,
                  const SoilLibrary& soils) {
  SoilCache cache;
  for (const auto& s : scenarios) {
    if (!weather.contains(s.location_id, s.year)) {
      throw ValidationError(identify(s) + ": missing weather");
    }
    if (!soils.contains(s.soil_code)) throw ValidationError(identify(s) + ": missing soil");
    if (!cache.profiles.count(s.soil_code)) {
      const auto& soil = soils.get(s.soil_code);
      cache.profiles.emplace(s.soil_code, cropsim::SoilProfile(soil));
      cache.encodings.emplace(s.soil_code, encode_soil(soil));
    }
  }
  return cache;
}

Sample simulate_one(const Scenario& s, const WeatherStore& weather, const SoilCache& cache,
                    const cropsim::SimulationOptions& options) {
  const auto& series = weather.get(s.location_id, s.year);
  const auto result = cropsim::run_simulation(series, cache.profiles.at(s.soil_code), s.mgmt, options);
  Sample out;
  out.temporal = encode_temporal(series, s.mgmt);
  out.scalars = encode_scalars(s.mgmt);
  out.soil = cache.encodings.at(s.soil_code);
  out.target = result.fresh_yield;
  out.meta = {s.location_id, s.year, s.soil_code};
  return out;
}

}  // namespace

std::vector<Sample> generate_dataset(std::span<const Scenario> scenarios, const WeatherStore& weather,
                                     const SoilLibrary& soils, const GenerateOptions& options) {
  const SoilCache cache = prepare(scenarios, weather, soils);
  cropsim::SimulationOptions sim;
  sim.params = options.params;
  std::vector<Sample> out(scenarios.size());

  const int threads = options.workers > 0 ? options.workers : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  std::optional<std::pair<std::ptrdiff_t, std::exception_ptr>> failure;
  std::mutex failure_mutex;

#pragma omp parallel for schedule(dynamic, 32) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          simulate_one(scenarios[static_cast<std::size_t>(i)], weather, cache, sim);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure || failure->first > i) failure.emplace(i, std::current_exception());
    }
  }
  if (failure) std::rethrow_exception(failure->second);
  return out;
}

std::vector<Sample> generate_dataset_serial(std::span<const Scenario> scenarios,
                                            const WeatherStore& weather, const SoilLibrary& soils,
                                            const GenerateOptions& options) {
  const SoilCache cache = prepare(scenarios, weather, soils);
  cropsim::SimulationOptions sim;
  sim.params = options.params;
  std::vector<Sample> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(simulate_one(s, weather, cache, sim));
  return out;
}

DomainSplit split_by_soil_domain(std::vector<Sample> samples) {
  DomainSplit split;
  for (auto& s : samples) {
    if (cropsim::is_peat(s.meta.soil_code)) {
      split.peat.push_back(std::move(s));
    } else if (cropsim::is_sand(s.meta.soil_code)) {
      split.sand.push_back(std::move(s));
    } else {
      split.other.push_back(std::move(s));
    }
  }
  return split;
}

std::vector<Sample> exclude_years(std::vector<Sample> samples, const std::set<int>& banned_years) {
  std::erase_if(samples, [&](const Sample& s) { return banned_years.count(s.meta.year) != 0; });
  return samples;
}

std::set<int> years_of(std::span<const Sample> samples) {
  std::set<int> years;
  for (const auto& s : samples) years.insert(s.meta.year);
  return years;
}

std::vector<std::size_t> draw_indices(std::size_t pool, std::size_t count, std::uint64_t seed) {
  if (count > pool) {
    throw ValidationError("cannot draw " + std::to_string(count) + " of " + std::to_string(pool));
  }
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

std::vector<Sample> take(std::span<const Sample> samples, std::span<const std::size_t> indices) {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples[i]);
  return out;
}

}  // namespace agrimeta::datagen
