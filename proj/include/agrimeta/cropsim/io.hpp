#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::cropsim {

// CSV with header `doy,radiation,rain,tmax,tmin`. Errors carry the line number.
WeatherSeries read_weather_csv(std::istream& in, const std::string& location_id, int year,
                               const std::string& source = "<stream>");
// File name convention: <location>_<year>.csv
WeatherSeries read_weather_csv(const std::filesystem::path& path);
void write_weather_csv(std::ostream& out, const WeatherSeries& weather);

nlohmann::json to_json(const SoilType& soil);
SoilType soil_from_json(const nlohmann::json& j);
// Accepts a single record, an array of records, or {"soils": [...]}.
std::vector<SoilType> read_soil_library(const std::filesystem::path& path);
void write_soil_library(const std::filesystem::path& path, const std::vector<SoilType>& soils);

nlohmann::json to_json(const ManagementPlan& plan);
ManagementPlan management_from_json(const nlohmann::json& j);
ManagementPlan read_management(const std::filesystem::path& path);

// doy,thermal_time,lai,soil_water_mm,tuber_dry_kg_ha,n_available_kg_ha,...
void write_trace_csv(std::ostream& out, const std::vector<DailyRecord>& trace);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace agrimeta::cropsim
