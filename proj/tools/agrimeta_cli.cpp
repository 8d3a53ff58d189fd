#include <zlib.h>

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agrimeta/baselines/data_driven.hpp"
#include "agrimeta/cropsim/io.hpp"
#include "agrimeta/cropsim/simulator.hpp"
#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/datagen/dataset_io.hpp"
#include "agrimeta/datagen/scenario.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/evalx/metrics.hpp"
#include "agrimeta/evalx/pseudo_real_experiment.hpp"
#include "agrimeta/evalx/report_io.hpp"
#include "agrimeta/evalx/transfer_experiment.hpp"
#include "agrimeta/rng.hpp"
#include "agrimeta/tensornet/model_io.hpp"
#include "agrimeta/trainer/report_io.hpp"
#include "agrimeta/trainer/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace agrimeta::cli {
namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr std::size_t kGenerateChunk = 4096;

// ---------------------------------------------------------------------------
// Configuration

struct Selection {
  std::string domain = "all";  // all | peat | sand
  std::size_t size = 0;        // 0 keeps every matching sample
  std::set<int> exclude_years;
};

struct FactorialCounts {
  int locations = 7;
  int years = 32;
  int soils = 32;
  int replicates = 12;
  int first_year = 1990;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  std::optional<fs::path> weather_dir;
  std::optional<fs::path> soil_library;
  FactorialCounts factorial;
  bool use_soil_stream = true;

  Selection pretrain_select;
  trainer::TrainConfig pretrain;
  Selection finetune_select;
  trainer::TrainConfig finetune;
  Selection evaluate_select;

  evalx::TransferExperimentConfig transfer;

  std::vector<int> pseudo_years{1994, 1995, 1996, 1997, 1998, 1999, 2000, 2001, 2002, 2003};
  std::size_t pseudo_records_per_year = 30;
  std::size_t pseudo_pretrain_size = 25000;  // 20000 train + 5000 validation at the default split
  std::vector<std::uint64_t> pseudo_seeds;
  trainer::TrainConfig pseudo_pretrain;
  trainer::TrainConfig pseudo_finetune;
  trainer::TrainConfig pseudo_baseline;

  json effective;  // merged config, hashed into the manifests
};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

void read_train(const json& j, trainer::TrainConfig& cfg, const std::string& where) {
  reject_unknown(j,
                 {"initial_lr", "es_min_delta", "es_patience", "lr_factor", "lr_min_delta", "lr_patience",
                  "max_epochs", "batch_size", "val_fraction"},
                 where);
  read_opt(j, "initial_lr", cfg.initial_lr, where);
  read_opt(j, "es_min_delta", cfg.es_min_delta, where);
  read_opt(j, "es_patience", cfg.es_patience, where);
  read_opt(j, "lr_factor", cfg.lr_factor, where);
  read_opt(j, "lr_min_delta", cfg.lr_min_delta, where);
  read_opt(j, "lr_patience", cfg.lr_patience, where);
  read_opt(j, "max_epochs", cfg.max_epochs, where);
  read_opt(j, "batch_size", cfg.batch_size, where);
  read_opt(j, "val_fraction", cfg.val_fraction, where);
  cfg.validate();
}

void read_selection(const json& j, Selection& sel, const std::string& where) {
  read_opt(j, "domain", sel.domain, where);
  read_opt(j, "size", sel.size, where);
  std::vector<int> years;
  read_opt(j, "exclude_years", years, where);
  sel.exclude_years.insert(years.begin(), years.end());
  if (sel.domain != "all" && sel.domain != "peat" && sel.domain != "sand") {
    throw ValidationError(where + ".domain must be all, peat or sand");
  }
}

void read_stage(const json& j, Selection& sel, trainer::TrainConfig& cfg, const std::string& where) {
  reject_unknown(j, {"domain", "size", "exclude_years", "train"}, where);
  read_selection(j, sel, where);
  if (j.contains("train")) read_train(j.at("train"), cfg, where + ".train");
}

fs::path existing(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ValidationError(what + " not found: " + p.string());
  return p;
}

RunConfig load_config(const std::optional<fs::path>& config_path, std::optional<std::uint64_t> seed_flag,
                      bool no_soil_stream, bool seed_required) {
  json j = json::object();
  if (config_path) j = cropsim::read_json_file(existing(*config_path, "config file"));
  reject_unknown(j,
                 {"seed", "weather_dir", "soil_library", "factorial", "use_soil_stream", "pretrain", "finetune",
                  "evaluate", "transfer", "pseudo_real"},
                 "config");

  RunConfig cfg;
  if (seed_flag) {
    j["seed"] = *seed_flag;
  } else if (!j.contains("seed") && seed_required) {
    throw ValidationError("a master seed is required (--seed or \"seed\" in the config)");
  }
  read_opt(j, "seed", cfg.master_seed, "config");
  if (no_soil_stream) j["use_soil_stream"] = false;
  read_opt(j, "use_soil_stream", cfg.use_soil_stream, "config");

  // Relative paths resolve against the config file's directory.
  const fs::path base = config_path ? config_path->parent_path() : fs::path{};
  auto resolve = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key)) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    return existing(p, key);
  };
  cfg.weather_dir = resolve("weather_dir");
  cfg.soil_library = resolve("soil_library");

  if (j.contains("factorial")) {
    const auto& f = j.at("factorial");
    reject_unknown(f, {"locations", "years", "soils", "replicates", "first_year"}, "factorial");
    read_opt(f, "locations", cfg.factorial.locations, "factorial");
    read_opt(f, "years", cfg.factorial.years, "factorial");
    read_opt(f, "soils", cfg.factorial.soils, "factorial");
    read_opt(f, "replicates", cfg.factorial.replicates, "factorial");
    read_opt(f, "first_year", cfg.factorial.first_year, "factorial");
    const auto& c = cfg.factorial;
    if (c.locations < 1 || c.years < 1 || c.soils < 1 || c.replicates < 1) {
      throw ValidationError("factorial counts must be positive");
    }
  }

  if (j.contains("pretrain")) read_stage(j.at("pretrain"), cfg.pretrain_select, cfg.pretrain, "pretrain");
  if (j.contains("finetune")) read_stage(j.at("finetune"), cfg.finetune_select, cfg.finetune, "finetune");
  if (j.contains("evaluate")) {
    reject_unknown(j.at("evaluate"), {"domain", "size", "exclude_years"}, "evaluate");
    read_selection(j.at("evaluate"), cfg.evaluate_select, "evaluate");
  }

  auto& t = cfg.transfer;
  t.master_seed = cfg.master_seed;
  t.seeds = {cfg.master_seed + 1, cfg.master_seed + 2, cfg.master_seed + 3};
  if (j.contains("transfer")) {
    const auto& x = j.at("transfer");
    reject_unknown(x, {"pretrain_size", "holdout_size", "finetune_sizes", "seeds", "use_soil_stream", "pretrain",
                       "finetune", "baseline"},
                   "transfer");
    read_opt(x, "pretrain_size", t.pretrain_size, "transfer");
    read_opt(x, "holdout_size", t.holdout_size, "transfer");
    read_opt(x, "finetune_sizes", t.finetune_sizes, "transfer");
    read_opt(x, "seeds", t.seeds, "transfer");
    read_opt(x, "use_soil_stream", t.use_soil_stream, "transfer");
    if (x.contains("pretrain")) read_train(x.at("pretrain"), t.pretrain, "transfer.pretrain");
    if (x.contains("finetune")) read_train(x.at("finetune"), t.finetune, "transfer.finetune");
    if (x.contains("baseline")) read_train(x.at("baseline"), t.baseline, "transfer.baseline");
  }
  if (no_soil_stream) t.use_soil_stream = false;
  t.validate();

  cfg.pseudo_seeds = {cfg.master_seed + 1, cfg.master_seed + 2, cfg.master_seed + 3};
  if (j.contains("pseudo_real")) {
    const auto& x = j.at("pseudo_real");
    reject_unknown(x, {"years", "records_per_year", "pretrain_size", "seeds", "pretrain", "finetune", "baseline"},
                   "pseudo_real");
    read_opt(x, "years", cfg.pseudo_years, "pseudo_real");
    read_opt(x, "records_per_year", cfg.pseudo_records_per_year, "pseudo_real");
    read_opt(x, "pretrain_size", cfg.pseudo_pretrain_size, "pseudo_real");
    read_opt(x, "seeds", cfg.pseudo_seeds, "pseudo_real");
    if (x.contains("pretrain")) read_train(x.at("pretrain"), cfg.pseudo_pretrain, "pseudo_real.pretrain");
    if (x.contains("finetune")) read_train(x.at("finetune"), cfg.pseudo_finetune, "pseudo_real.finetune");
    if (x.contains("baseline")) read_train(x.at("baseline"), cfg.pseudo_baseline, "pseudo_real.baseline");
    if (cfg.pseudo_seeds.empty()) throw ValidationError("pseudo_real.seeds must not be empty");
  }

  cfg.effective = j;
  return cfg;
}

// ---------------------------------------------------------------------------
// Manifests

std::uint32_t crc_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

std::string file_crc(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(in.gcount()));
  }
  return hex32(static_cast<std::uint32_t>(crc));
}

std::string config_hash(const RunConfig& cfg) { return hex32(crc_of(cfg.effective.dump())); }

class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg, fs::path out_dir)
      : out_dir_(std::move(out_dir)) {
    j_["tool"] = "agrimeta";
    j_["version"] = kToolVersion;
    j_["command"] = std::move(command);
    j_["seed"] = cfg.master_seed;
    j_["config_hash"] = config_hash(cfg);
    j_["config"] = cfg.effective;
    j_["inputs"] = json::array();
    j_["outputs"] = json::array();
  }

  // Records an input and warns when its upstream manifest disagrees on seed or config.
  void input(const std::string& role, const fs::path& p) {
    j_["inputs"].push_back({{"role", role}, {"file", p.filename().string()}, {"crc32", file_crc(p)}});
    const fs::path upstream = p.parent_path() / "manifest.json";
    if (!fs::exists(upstream)) return;
    json m;
    try {
      m = cropsim::read_json_file(upstream);
    } catch (const std::exception&) {
      std::cerr << "warning: unreadable manifest " << upstream.string() << '\n';
      return;
    }
    if (m.value("seed", j_["seed"].get<std::uint64_t>()) != j_["seed"].get<std::uint64_t>()) {
      std::cerr << "warning: " << p.filename().string() << " was produced with seed " << m["seed"]
                << ", this run uses " << j_["seed"] << '\n';
    }
    if (m.value("config_hash", std::string{}) != j_["config_hash"].get<std::string>()) {
      std::cerr << "warning: " << p.filename().string() << " was produced with config hash "
                << m.value("config_hash", std::string{"?"}) << ", this run uses " << j_["config_hash"].get<std::string>()
                << '\n';
    }
  }

  void output(const std::string& name) {
    j_["outputs"].push_back({{"file", name}, {"crc32", file_crc(out_dir_ / name)}});
  }

  void write() const { evalx::write_text(out_dir_ / "manifest.json", j_.dump(2) + "\n"); }

 private:
  fs::path out_dir_;
  json j_;
};

// ---------------------------------------------------------------------------
// Shared plumbing

void progress(const std::string& msg) { std::cerr << msg << '\n'; }

datagen::SoilLibrary soils_of(const RunConfig& cfg) {
  if (cfg.soil_library) return datagen::SoilLibrary(cropsim::read_soil_library(*cfg.soil_library));
  return datagen::SoilLibrary::shipped();
}

std::vector<int> factorial_years(const RunConfig& cfg) {
  std::vector<int> years;
  for (int i = 0; i < cfg.factorial.years; ++i) years.push_back(cfg.factorial.first_year + i);
  return years;
}

datagen::WeatherStore weather_of(const RunConfig& cfg, const std::vector<int>& years) {
  if (cfg.weather_dir) return datagen::WeatherStore::load_directory(*cfg.weather_dir);
  return datagen::WeatherStore::synthetic(cfg.factorial.locations, years, derive_seed(cfg.master_seed, {0x3ea}));
}

datagen::FactorialAxes axes_of(const RunConfig& cfg, const datagen::WeatherStore& weather,
                               const datagen::SoilLibrary& soils) {
  datagen::FactorialAxes axes;
  auto locations = weather.locations();
  if (locations.size() > static_cast<std::size_t>(cfg.factorial.locations)) {
    locations.resize(static_cast<std::size_t>(cfg.factorial.locations));
  }
  axes.locations = locations;
  axes.years = factorial_years(cfg);
  auto codes = soils.codes();
  if (codes.size() > static_cast<std::size_t>(cfg.factorial.soils)) {
    codes.resize(static_cast<std::size_t>(cfg.factorial.soils));
  }
  axes.soil_codes = codes;
  axes.replicates = cfg.factorial.replicates;
  return axes;
}

std::vector<datagen::Sample> generate_in_memory(std::span<const datagen::Scenario> scenarios,
                                                const datagen::WeatherStore& weather,
                                                const datagen::SoilLibrary& soils) {
  std::vector<datagen::Sample> out;
  out.reserve(scenarios.size());
  for (std::size_t begin = 0; begin < scenarios.size(); begin += kGenerateChunk) {
    const std::size_t n = std::min(kGenerateChunk, scenarios.size() - begin);
    auto chunk = datagen::generate_dataset(scenarios.subspan(begin, n), weather, soils);
    std::move(chunk.begin(), chunk.end(), std::back_inserter(out));
    progress("generated " + std::to_string(begin + n) + " / " + std::to_string(scenarios.size()));
  }
  return out;
}

// Domain filter, year exclusion and a seeded random subset; the same selection
// on the same dataset always yields the same samples in the same order.
std::vector<datagen::Sample> select(std::vector<datagen::Sample> samples, const Selection& sel,
                                    std::uint64_t master_seed) {
  if (sel.domain != "all") {
    auto split = datagen::split_by_soil_domain(std::move(samples));
    samples = sel.domain == "peat" ? std::move(split.peat) : std::move(split.sand);
  }
  if (!sel.exclude_years.empty()) samples = datagen::exclude_years(std::move(samples), sel.exclude_years);
  if (sel.size > 0) {
    if (sel.size > samples.size()) {
      throw ValidationError("selection asks for " + std::to_string(sel.size) + " samples but only " +
                            std::to_string(samples.size()) + " match");
    }
    const auto idx = datagen::draw_indices(samples.size(), sel.size,
                                           derive_seed(master_seed, {0x5e7, static_cast<std::int64_t>(sel.size)}));
    samples = datagen::take(samples, idx);
  }
  if (samples.empty()) throw ValidationError("selection matched no samples");
  return samples;
}

std::vector<int> years_vector(std::span<const datagen::Sample> samples) {
  const auto ys = datagen::years_of(samples);
  return {ys.begin(), ys.end()};
}

void write_train_outputs(const fs::path& out, const trainer::TrainReport& report, Manifest& manifest,
                         const std::string& prefix = "train", const std::string& suffix = "") {
  const std::string history = prefix + "_history" + suffix + ".csv";
  const std::string summary = prefix + "_report" + suffix + ".json";
  trainer::write_history_csv(out / history, report);
  evalx::write_text(out / summary, trainer::summary_json(report).dump(2) + "\n");
  manifest.output(history);
  manifest.output(summary);
}

// ---------------------------------------------------------------------------
// Commands

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::string out = ".";
  bool no_soil_stream = false;

  RunConfig load(bool seed_required = true) const {
    std::optional<fs::path> path;
    if (config) path = fs::path(*config);
    return load_config(path, seed, no_soil_stream, seed_required);
  }
  fs::path out_dir() const {
    fs::create_directories(out);
    return out;
  }
};

struct SimulateArgs {
  std::string weather, soil, mgmt;
  std::optional<int> soil_code;
  std::optional<std::string> trace;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto weather = cropsim::read_weather_csv(existing(a.weather, "weather file"));
  const auto soils = cropsim::read_soil_library(existing(a.soil, "soil file"));
  const cropsim::SoilType* soil = nullptr;
  if (a.soil_code) {
    for (const auto& s : soils) {
      if (s.code == *a.soil_code) soil = &s;
    }
    if (!soil) throw ValidationError("soil code " + std::to_string(*a.soil_code) + " not in " + a.soil);
  } else {
    if (soils.size() != 1) throw ValidationError(a.soil + " holds several soils; pick one with --soil-code");
    soil = &soils.front();
  }
  const auto mgmt = cropsim::read_management(existing(a.mgmt, "management file"));

  cropsim::SimulationOptions options;
  options.trace = a.trace.has_value();
  const auto result = cropsim::run_simulation(weather, *soil, mgmt, options);

  std::cout << std::setprecision(6) << std::fixed << "fresh_yield_t_ha " << result.fresh_yield << '\n'
            << "harvest_doy " << result.harvest_doy << '\n'
            << "reached_maturity " << (result.reached_maturity ? "true" : "false") << '\n';
  if (a.trace) {
    std::ofstream out(*a.trace);
    if (!out) throw ValidationError("cannot write " + *a.trace);
    cropsim::write_trace_csv(out, *result.daily_trace);
  }
  return 0;
}

int cmd_generate(const Common& c) {
  const auto cfg = c.load();
  const auto out = c.out_dir();
  const auto soils = soils_of(cfg);
  const auto weather = weather_of(cfg, factorial_years(cfg));
  const auto axes = axes_of(cfg, weather, soils);
  const auto scenarios = datagen::build_factorial(axes, cfg.master_seed);
  progress(std::to_string(scenarios.size()) + " scenarios");

  Manifest manifest("generate", cfg, out);
  {
    datagen::DatasetWriter writer(out / "dataset.agds", axes.locations);
    std::ofstream csv;
    for (std::size_t begin = 0; begin < scenarios.size(); begin += kGenerateChunk) {
      const std::size_t n = std::min(kGenerateChunk, scenarios.size() - begin);
      const auto chunk = datagen::generate_dataset(std::span(scenarios).subspan(begin, n), weather, soils);
      writer.append(chunk);
      progress("generated " + std::to_string(begin + n) + " / " + std::to_string(scenarios.size()));
    }
    writer.close();
  }
  // The CSV summary is rebuilt from the file so it reflects exactly what was stored.
  datagen::write_dataset_csv(out / "dataset.csv", datagen::read_dataset(out / "dataset.agds"));
  manifest.output("dataset.agds");
  manifest.output("dataset.csv");
  manifest.write();
  std::cout << "wrote " << scenarios.size() << " samples to " << (out / "dataset.agds").string() << '\n';
  return 0;
}

int cmd_pretrain(const Common& c, const std::string& dataset_path) {
  const auto cfg = c.load();
  const auto out = c.out_dir();
  Manifest manifest("pretrain", cfg, out);
  manifest.input("dataset", existing(dataset_path, "dataset"));

  const auto data = select(datagen::read_dataset(dataset_path), cfg.pretrain_select, cfg.master_seed);
  const auto spec = tensornet::metamodel_spec(cfg.use_soil_stream);
  auto tc = cfg.pretrain;
  tc.seed = derive_seed(cfg.master_seed, {0x7a1});
  progress("pretraining on " + std::to_string(data.size()) + " samples");
  auto result = trainer::train(spec, tensornet::init_parameters(spec, derive_seed(cfg.master_seed, {0x1a17})), data, tc);

  tensornet::Model model{spec, std::move(result.params), result.normalizer, {tc.seed, tc.val_fraction, years_vector(data)}};
  tensornet::save_model(out / "model.agmm", model);
  manifest.output("model.agmm");
  write_train_outputs(out, result.report, manifest);
  manifest.write();
  std::cout << "epochs " << result.report.epochs_run << ", best validation RMSE " << result.report.best_val_rmse
            << " t/ha\n";
  return 0;
}

int cmd_finetune(const Common& c, const std::string& model_path, const std::string& dataset_path) {
  const auto cfg = c.load();
  const auto out = c.out_dir();
  Manifest manifest("finetune", cfg, out);
  manifest.input("model", existing(model_path, "model"));
  manifest.input("dataset", existing(dataset_path, "dataset"));

  const auto pretrained = tensornet::load_model(model_path);
  const auto data = select(datagen::read_dataset(dataset_path), cfg.finetune_select, cfg.master_seed);
  auto tc = cfg.finetune;
  tc.seed = derive_seed(cfg.master_seed, {0xf17e});
  progress("fine-tuning on " + std::to_string(data.size()) + " samples");
  auto result = trainer::fine_tune(pretrained, data, tc);

  std::set<int> years(pretrained.provenance.training_years.begin(), pretrained.provenance.training_years.end());
  const auto new_years = datagen::years_of(data);
  years.insert(new_years.begin(), new_years.end());
  tensornet::Model model{pretrained.spec, std::move(result.params), result.normalizer,
                         {tc.seed, tc.val_fraction, {years.begin(), years.end()}}};
  tensornet::save_model(out / "model.agmm", model);
  manifest.output("model.agmm");
  write_train_outputs(out, result.report, manifest);
  manifest.write();
  std::cout << "epochs " << result.report.epochs_run << ", best validation RMSE " << result.report.best_val_rmse
            << " t/ha\n";
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& model_path, const std::string& dataset_path,
                 const std::string& split) {
  if (split != "all" && split != "validation") throw ValidationError("--split must be all or validation");
  const auto cfg = c.load();
  const auto out = c.out_dir();
  Manifest manifest("evaluate", cfg, out);
  manifest.input("model", existing(model_path, "model"));
  manifest.input("dataset", existing(dataset_path, "dataset"));

  const auto model = tensornet::load_model(model_path);
  auto data = select(datagen::read_dataset(dataset_path), cfg.evaluate_select, cfg.master_seed);
  if (split == "validation") {
    // Same split the trainer drew from the model's recorded seed and fraction.
    const auto s = trainer::split_train_validation(data.size(), model.provenance.val_fraction, model.provenance.seed);
    data = datagen::take(data, s.validation);
  }
  const auto predictions = trainer::predict(model.spec, model.params, model.normalizer, data);
  std::vector<double> observed;
  observed.reserve(data.size());
  for (const auto& s : data) observed.push_back(s.target);
  const auto report = evalx::evaluate(fs::path(model_path).filename().string(),
                                      fs::path(dataset_path).filename().string() + ":" + split, predictions, observed);

  evalx::write_text(out / "eval_report.json", evalx::to_json(report).dump(2) + "\n");
  evalx::write_text(out / "predictions.csv", evalx::eval_pairs_csv(report));
  evalx::write_text(out / "scatter.svg", evalx::scatter_svg("Metamodel vs simulator", report.pairs));
  for (const char* f : {"eval_report.json", "predictions.csv", "scatter.svg"}) manifest.output(f);
  manifest.write();
  std::cout << std::setprecision(6) << "n " << report.n << "\nrmse " << report.rmse << "\npearson_r "
            << (report.pearson_r ? std::to_string(*report.pearson_r) : std::string("undefined")) << "\nmean_bias "
            << report.mean_bias << '\n';
  return 0;
}

int cmd_transfer(const Common& c, const std::optional<std::string>& dataset_path) {
  const auto cfg = c.load();
  const auto out = c.out_dir();
  Manifest manifest("experiment transfer", cfg, out);

  std::vector<datagen::Sample> data;
  if (dataset_path) {
    manifest.input("dataset", existing(*dataset_path, "dataset"));
    data = datagen::read_dataset(*dataset_path);
  } else {
    const auto soils = soils_of(cfg);
    const auto weather = weather_of(cfg, factorial_years(cfg));
    const auto scenarios = datagen::build_factorial(axes_of(cfg, weather, soils), cfg.master_seed);
    data = generate_in_memory(scenarios, weather, soils);
  }
  const auto results = evalx::run_transfer_experiment(data, cfg.transfer, progress);
  data.clear();
  data.shrink_to_fit();

  evalx::write_text(out / "transfer_results.csv", evalx::transfer_csv(results));
  evalx::write_text(out / "transfer_summary.json", evalx::transfer_summary(results).dump(2) + "\n");
  const auto grid = evalx::transfer_grid(results);
  evalx::write_text(out / "transfer_grid.txt", grid);
  for (const char* f : {"transfer_results.csv", "transfer_summary.json", "transfer_grid.txt"}) manifest.output(f);
  manifest.write();
  std::cout << grid;
  return 0;
}

int cmd_pseudo_real(const Common& c, const std::vector<std::string>& model_paths) {
  const auto cfg = c.load();
  const auto out = c.out_dir();
  Manifest manifest("experiment pseudo-real", cfg, out);

  const auto soils = soils_of(cfg);
  auto years = factorial_years(cfg);
  for (int y : cfg.pseudo_years) {
    if (std::find(years.begin(), years.end(), y) == years.end()) years.push_back(y);
  }
  const auto weather = weather_of(cfg, years);

  std::vector<tensornet::Model> pretrained;
  if (!model_paths.empty()) {
    for (const auto& p : model_paths) {
      manifest.input("model", existing(p, "model"));
      pretrained.push_back(tensornet::load_model(p));
    }
  } else {
    // Pretraining data never contains an observation year.
    const std::set<int> banned(cfg.pseudo_years.begin(), cfg.pseudo_years.end());
    auto scenarios = datagen::build_factorial(axes_of(cfg, weather, soils), cfg.master_seed);
    std::erase_if(scenarios, [&](const datagen::Scenario& s) { return banned.count(s.year) != 0; });
    if (cfg.pseudo_pretrain_size > 0 && cfg.pseudo_pretrain_size < scenarios.size()) {
      const auto idx = datagen::draw_indices(scenarios.size(), cfg.pseudo_pretrain_size,
                                             derive_seed(cfg.master_seed, {0x9e1}));
      std::vector<datagen::Scenario> picked;
      picked.reserve(idx.size());
      for (auto i : idx) picked.push_back(scenarios[i]);
      scenarios = std::move(picked);
    }
    const auto data = generate_in_memory(scenarios, weather, soils);
    const auto spec = tensornet::metamodel_spec(cfg.use_soil_stream);
    for (std::size_t k = 0; k < cfg.pseudo_seeds.size(); ++k) {
      const auto seed = cfg.pseudo_seeds[k];
      auto tc = cfg.pseudo_pretrain;
      tc.seed = derive_seed(seed, {0x9ea7, 1});
      progress("pretraining seed " + std::to_string(seed) + " on " + std::to_string(data.size()) + " samples");
      auto r = trainer::train(spec, tensornet::init_parameters(spec, derive_seed(seed, {0x1a17})), data, tc);
      tensornet::Model m{spec, std::move(r.params), r.normalizer, {tc.seed, tc.val_fraction, years_vector(data)}};
      const std::string name = "pretrained_" + std::to_string(k + 1) + ".agmm";
      tensornet::save_model(out / name, m);
      write_train_outputs(out, r.report, manifest, "pretrain", "_" + std::to_string(k + 1));
      manifest.output(name);
      pretrained.push_back(std::move(m));
    }
  }

  evalx::PseudoDataConfig pd;
  pd.years = cfg.pseudo_years;
  pd.records_per_year = cfg.pseudo_records_per_year;
  pd.seed = derive_seed(cfg.master_seed, {0x0b5});
  const auto observations = evalx::generate_pseudo_observations(weather, soils, pd);

  evalx::PseudoRealConfig pc;
  pc.seeds = cfg.pseudo_seeds;
  pc.finetune = cfg.pseudo_finetune;
  pc.baseline = cfg.pseudo_baseline;
  const auto results = evalx::run_pseudo_real_experiment(pretrained, observations, pc, progress);

  evalx::write_text(out / "pseudo_real_results.csv", evalx::pseudo_real_csv(results));
  const auto summary = evalx::pseudo_real_summary(results);
  evalx::write_text(out / "pseudo_real_summary.json", summary.dump(2) + "\n");
  manifest.output("pseudo_real_results.csv");
  manifest.output("pseudo_real_summary.json");
  for (const auto& s : results.summaries) {
    const std::string name = "scatter_" + s.model + ".svg";
    evalx::write_text(out / name, evalx::scatter_svg(s.model, s.pairs));
    manifest.output(name);
  }
  manifest.write();

  std::cout << std::fixed << std::setprecision(2) << std::left << std::setw(20) << "model" << std::setw(16) << "rmse"
            << std::setw(16) << "r" << "bias\n";
  for (const auto& s : results.summaries) {
    std::ostringstream rm, rr, bb;
    rm << std::fixed << std::setprecision(2) << s.rmse.mean << " (" << s.rmse.std << ")";
    rr << std::fixed << std::setprecision(3) << s.r.mean << " (" << s.r.std << ")";
    bb << std::fixed << std::setprecision(2) << s.bias.mean << " (" << s.bias.std << ")";
    std::cout << std::setw(20) << s.model << std::setw(16) << rm.str() << std::setw(16) << rr.str() << bb.str()
              << '\n';
  }
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_flag("--no-soil-stream", c.no_soil_stream, "Build the metamodel without the soil stream");
}

int run(int argc, char** argv) {
  CLI::App app{"Crop simulator metamodelling and transfer-learning toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the crop simulator on one field season");
  simulate->add_option("--weather", sim.weather, "Weather CSV named <location>_<year>.csv")->required();
  simulate->add_option("--soil", sim.soil, "Soil JSON (one record or a library)")->required();
  simulate->add_option("--soil-code", sim.soil_code, "Soil code to pick from a library");
  simulate->add_option("--mgmt", sim.mgmt, "Management JSON")->required();
  simulate->add_option("--trace", sim.trace, "Write the daily state trace to this CSV");

  Common gen_c, pre_c, ft_c, ev_c, tr_c, pr_c;
  std::string pre_dataset, ft_dataset, ft_model, ev_dataset, ev_model, ev_split = "all";
  std::optional<std::string> tr_dataset;
  std::vector<std::string> pr_models;

  auto* generate = app.add_subcommand("generate", "Simulate the factorial design into a dataset file");
  add_common(generate, gen_c);
  auto* pretrain = app.add_subcommand("pretrain", "Train a metamodel on a dataset");
  add_common(pretrain, pre_c);
  pretrain->add_option("--dataset", pre_dataset, "Dataset file")->required();
  auto* finetune = app.add_subcommand("finetune", "Fine-tune a pretrained metamodel");
  add_common(finetune, ft_c);
  finetune->add_option("--model", ft_model, "Pretrained model file")->required();
  finetune->add_option("--dataset", ft_dataset, "Target dataset file")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Score a model against a dataset");
  add_common(evaluate, ev_c);
  evaluate->add_option("--model", ev_model, "Model file")->required();
  evaluate->add_option("--dataset", ev_dataset, "Dataset file")->required();
  evaluate->add_option("--split", ev_split, "all, or validation to rebuild the model's training hold-out")
      ->capture_default_str();

  auto* experiment = app.add_subcommand("experiment", "Run a complete experiment");
  experiment->require_subcommand(1);
  auto* transfer = experiment->add_subcommand("transfer", "Peat-to-sand fine-tuning grid");
  add_common(transfer, tr_c);
  transfer->add_option("--dataset", tr_dataset, "Use this dataset instead of generating one");
  auto* pseudo = experiment->add_subcommand("pseudo-real", "Leave-one-year-out comparison on pseudo field data");
  add_common(pseudo, pr_c);
  pseudo->add_option("--model", pr_models, "Pretrained model(s) to reuse instead of pretraining");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*simulate) return cmd_simulate(sim);
  if (*generate) return cmd_generate(gen_c);
  if (*pretrain) return cmd_pretrain(pre_c, pre_dataset);
  if (*finetune) return cmd_finetune(ft_c, ft_model, ft_dataset);
  if (*evaluate) return cmd_evaluate(ev_c, ev_model, ev_dataset, ev_split);
  if (*transfer) return cmd_transfer(tr_c, tr_dataset);
  if (*pseudo) return cmd_pseudo_real(pr_c, pr_models);
  return 1;
}

}  // namespace
}  // namespace agrimeta::cli

int main(int argc, char** argv) {
  try {
    return agrimeta::cli::run(argc, argv);
  } catch (const agrimeta::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
