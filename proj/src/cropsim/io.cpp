#include "agrimeta/cropsim/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "agrimeta/error.hpp"

namespace agrimeta::cropsim {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw FormatError(where + ": cannot parse number '" + t + "'");
  }
  return value;
}

template <typename T>
T require(const nlohmann::json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw FormatError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

WeatherSeries read_weather_csv(std::istream& in, const std::string& location_id, int year,
                               const std::string& source) {
  WeatherSeries series;
  series.location_id = location_id;
  series.year = year;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header_seen) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\r' && c != '\t') compact.push_back(c);
      }
      if (compact != "doy,radiation,rain,tmax,tmin") {
        throw FormatError(where + ": expected header 'doy,radiation,rain,tmax,tmin'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw FormatError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    WeatherDay d;
    const double doy = parse_number(fields[0], where);
    d.doy = static_cast<int>(doy);
    if (d.doy != doy) throw FormatError(where + ": doy must be an integer");
    d.radiation = parse_number(fields[1], where);
    d.rain = parse_number(fields[2], where);
    d.tmax = parse_number(fields[3], where);
    d.tmin = parse_number(fields[4], where);
    if (d.tmax < d.tmin) throw ValidationError(where + " (doy " + std::to_string(d.doy) + "): tmax < tmin");
    if (d.radiation < 0.0) throw ValidationError(where + ": negative radiation");
    if (d.rain < 0.0) throw ValidationError(where + ": negative rain");
    series.days.push_back(d);
  }
  if (!header_seen) throw FormatError(source + ": empty weather file");
  validate(series);
  return series;
}

WeatherSeries read_weather_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weather file " + path.string());
  const std::string stem = path.stem().string();
  const auto underscore = stem.rfind('_');
  if (underscore == std::string::npos) {
    throw ValidationError("weather file name must be <location>_<year>.csv: " + path.string());
  }
  int year = 0;
  const std::string year_text = stem.substr(underscore + 1);
  const auto [ptr, ec] = std::from_chars(year_text.data(), year_text.data() + year_text.size(), year);
  if (ec != std::errc{} || ptr != year_text.data() + year_text.size()) {
    throw ValidationError("weather file name must end in _<year>: " + path.string());
  }
  return read_weather_csv(in, stem.substr(0, underscore), year, path.string());
}

void write_weather_csv(std::ostream& out, const WeatherSeries& weather) {
  out << "doy,radiation,rain,tmax,tmin\n" << std::setprecision(17);
  for (const auto& d : weather.days) {
    out << d.doy << ',' << d.radiation << ',' << d.rain << ',' << d.tmax << ',' << d.tmin << '\n';
  }
}

nlohmann::json to_json(const SoilType& soil) {
  nlohmann::json horizons = nlohmann::json::array();
  for (const auto& h : soil.horizons) {
    horizons.push_back({{"top_cm", h.top_cm},       {"bottom_cm", h.bottom_cm},
                        {"clay_frac", h.clay_frac}, {"loam_frac", h.loam_frac},
                        {"om_frac", h.om_frac},     {"theta_sat", h.theta_sat},
                        {"vg_alpha", h.vg_alpha},   {"vg_lambda", h.vg_lambda},
                        {"vg_n", h.vg_n},           {"theta_res", h.theta_res}});
  }
  return {{"code", soil.code}, {"name", soil.name}, {"horizons", horizons}};
}

SoilType soil_from_json(const nlohmann::json& j) {
  SoilType soil;
  soil.code = require<int>(j, "code", "soil");
  const std::string what = "soil " + std::to_string(soil.code);
  soil.name = j.value("name", what);
  const auto horizons = require<nlohmann::json>(j, "horizons", what);
  if (!horizons.is_array()) throw FormatError(what + ": 'horizons' must be an array");
  for (const auto& h : horizons) {
    SoilHorizon x;
    x.top_cm = require<double>(h, "top_cm", what);
    x.bottom_cm = require<double>(h, "bottom_cm", what);
    x.clay_frac = require<double>(h, "clay_frac", what);
    x.loam_frac = require<double>(h, "loam_frac", what);
    x.om_frac = require<double>(h, "om_frac", what);
    x.theta_sat = require<double>(h, "theta_sat", what);
    x.vg_alpha = require<double>(h, "vg_alpha", what);
    x.vg_lambda = require<double>(h, "vg_lambda", what);
    x.vg_n = require<double>(h, "vg_n", what);
    x.theta_res = require<double>(h, "theta_res", what);
    soil.horizons.push_back(x);
  }
  validate(soil);
  return soil;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<SoilType> read_soil_library(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  std::vector<SoilType> soils;
  if (j.is_object() && j.contains("soils")) {
    for (const auto& s : j.at("soils")) soils.push_back(soil_from_json(s));
  } else if (j.is_array()) {
    for (const auto& s : j) soils.push_back(soil_from_json(s));
  } else {
    soils.push_back(soil_from_json(j));
  }
  return soils;
}

void write_soil_library(const std::filesystem::path& path, const std::vector<SoilType>& soils) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : soils) arr.push_back(to_json(s));
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << nlohmann::json{{"soils", arr}}.dump(2) << '\n';
}

nlohmann::json to_json(const ManagementPlan& plan) {
  nlohmann::json n = nlohmann::json::array();
  for (const auto& e : plan.n_events) n.push_back({{"doy", e.doy}, {"kg_n_ha", e.kg_per_ha}});
  nlohmann::json irr = nlohmann::json::array();
  for (const auto& e : plan.irrigation_events) irr.push_back({{"doy", e.doy}, {"mm", e.mm}});
  return {{"sowing_doy", plan.sowing_doy},
          {"n_events", n},
          {"irrigation_events", irr},
          {"earliness", plan.earliness},
          {"max_rooting_depth", plan.max_rooting_depth}};
}

ManagementPlan management_from_json(const nlohmann::json& j) {
  const std::string what = "management";
  ManagementPlan plan;
  plan.sowing_doy = require<int>(j, "sowing_doy", what);
  plan.earliness = require<double>(j, "earliness", what);
  plan.max_rooting_depth = require<double>(j, "max_rooting_depth", what);
  if (j.contains("n_events")) {
    for (const auto& e : j.at("n_events")) {
      plan.n_events.push_back({require<int>(e, "doy", what + " n_events"),
                               require<double>(e, "kg_n_ha", what + " n_events")});
    }
  }
  if (j.contains("irrigation_events")) {
    for (const auto& e : j.at("irrigation_events")) {
      plan.irrigation_events.push_back({require<int>(e, "doy", what + " irrigation_events"),
                                        require<double>(e, "mm", what + " irrigation_events")});
    }
  }
  validate(plan);
  return plan;
}

ManagementPlan read_management(const std::filesystem::path& path) {
  return management_from_json(read_json_file(path));
}

void write_trace_csv(std::ostream& out, const std::vector<DailyRecord>& trace) {
  out << "doy,thermal_time,lai,soil_water_mm,tuber_dry_kg_ha,n_available_kg_ha,"
         "rain,irrigation,transpiration,evaporation,drainage\n"
      << std::setprecision(10);
  for (const auto& r : trace) {
    out << r.doy << ',' << r.thermal_time << ',' << r.lai << ',' << r.soil_water_mm << ','
        << r.tuber_dry_kg_ha << ',' << r.n_available_kg_ha << ',' << r.rain << ','
        << r.irrigation << ',' << r.transpiration << ',' << r.evaporation << ',' << r.drainage
        << '\n';
  }
}

}  // namespace agrimeta::cropsim
