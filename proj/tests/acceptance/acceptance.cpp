// Acceptance suite: one PASS/FAIL line per criterion and a final tally.
// Run without arguments for all criteria, or pass criterion numbers to run a
// subset (the tally then covers the subset only).

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/metric_oracles.hpp"
#include "../support/monitor_oracle.hpp"
#include "../support/oracle_net.hpp"
#include "agrimeta/baselines/linear_regression.hpp"
#include "agrimeta/cropsim/simulator.hpp"
#include "agrimeta/cropsim/soil_library.hpp"
#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/datagen/scenario.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/evalx/metrics.hpp"
#include "agrimeta/evalx/pseudo_real_experiment.hpp"
#include "agrimeta/evalx/report_io.hpp"
#include "agrimeta/evalx/transfer_experiment.hpp"
#include "agrimeta/rng.hpp"
#include "agrimeta/tensornet/network.hpp"
#include "agrimeta/trainer/monitor.hpp"
#include "agrimeta/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace agrimeta;

namespace {

constexpr std::uint64_t kMasterSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::ostream& log() { return std::cerr; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << v;
  return ss.str();
}

std::vector<int> all_years() {
  std::vector<int> years;
  for (int y = 1990; y < 2022; ++y) years.push_back(y);
  return years;
}

const datagen::WeatherStore& weather() {
  static const auto store = datagen::WeatherStore::synthetic(7, all_years(), kMasterSeed);
  return store;
}

// ---------------------------------------------------------------- 1
Outcome gradient_correctness() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (int k = 0; k < 20; ++k) {
    const auto spec = testing::random_mini_spec(rng);
    const auto params = testing::random_parameters(spec, rng);
    const auto batch = testing::random_batch(spec, 4, rng);
    const auto lg = tensornet::Network(spec).backward(params, batch.inputs, batch.targets);
    const auto r = testing::finite_difference_check(spec, params, batch, lg.gradient, 1e-5);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  const bool ok = worst < 1e-4 && checked > 0;
  return {ok, "max rel error " + sci(worst) + " over " + std::to_string(checked) + " coordinates (" +
                  std::to_string(skipped) + " kink-adjacent skipped), 20 specs"};
}

// ---------------------------------------------------------------- 2
// Models shared with criterion 4.
struct FidelityRun {
  std::vector<tensornet::Model> models;
  std::vector<double> r;
  std::vector<double> rmse;
};

FidelityRun& fidelity_state() {
  static FidelityRun run;
  return run;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

void pretrain_fidelity_models() {
  auto& state = fidelity_state();
  if (!state.models.empty()) return;

  const evalx::PseudoDataConfig pseudo;
  const std::set<int> banned(pseudo.years.begin(), pseudo.years.end());
  auto scenarios = datagen::build_factorial(7, 32, 32, 12, kMasterSeed);
  std::erase_if(scenarios, [&](const datagen::Scenario& s) { return banned.count(s.year) != 0; });

  constexpr std::size_t kHoldout = 5000, kPool = 25000;  // pool splits 20000 train / 5000 validation
  const auto pick = datagen::draw_indices(scenarios.size(), kHoldout + kPool, derive_seed(kMasterSeed, {0xacc2}));
  std::vector<datagen::Scenario> chosen;
  for (auto i : pick) chosen.push_back(scenarios[i]);
  scenarios.clear();
  scenarios.shrink_to_fit();
  log() << "[2] simulating " << chosen.size() << " of the factorial scenarios (pseudo years excluded)\n";
  auto samples = datagen::generate_dataset(chosen, weather(), datagen::SoilLibrary::shipped());
  const std::vector<datagen::Sample> holdout(samples.begin(), samples.begin() + kHoldout);
  const std::vector<datagen::Sample> pool(samples.begin() + kHoldout, samples.end());
  samples.clear();
  samples.shrink_to_fit();
  std::vector<double> observed;
  for (const auto& s : holdout) observed.push_back(s.target);

  const auto spec = tensornet::metamodel_spec(true);
  const auto years = datagen::years_of(pool);
  for (auto seed : kSeeds) {
    trainer::TrainConfig cfg;
    cfg.seed = derive_seed(seed, {0x9ea7, 1});
    const auto t0 = std::chrono::steady_clock::now();
    const auto tr = trainer::train(spec, tensornet::init_parameters(spec, derive_seed(seed, {0x1a17})), pool, cfg);
    const auto pred = trainer::predict(spec, tr.params, tr.normalizer, holdout);
    state.r.push_back(evalx::pearson_r(pred, observed));
    state.rmse.push_back(evalx::rmse(pred, observed));
    state.models.push_back({spec, tr.params, tr.normalizer,
                            {cfg.seed, cfg.val_fraction, std::vector<int>(years.begin(), years.end())}});
    log() << "[2] seed " << seed << ": " << tr.report.epochs_run << " epochs, train " << tr.report.train_size
          << ", r " << fmt(state.r.back()) << ", rmse " << fmt(state.rmse.back(), 2) << " t/ha, "
          << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0) << " s\n";
  }
}

Outcome metamodel_fidelity() {
  pretrain_fidelity_models();
  const auto& s = fidelity_state();
  const double min_r = *std::min_element(s.r.begin(), s.r.end());
  std::string detail = "r per seed";
  for (double r : s.r) detail += " " + fmt(r);
  detail += ", rmse per seed";
  for (double e : s.rmse) detail += " " + fmt(e, 2);
  detail += " t/ha (20000 train, 5000 hold-out)";
  return {min_r >= 0.90, detail};
}

// ---------------------------------------------------------------- 3
Outcome transfer_ordering() {
  evalx::TransferResults res;
  {
    log() << "[3] simulating the transfer factorial (6 replicates)\n";
    const auto scenarios = datagen::build_factorial(7, 32, 32, 6, kMasterSeed);
    const auto data = datagen::generate_dataset(scenarios, weather(), datagen::SoilLibrary::shipped());
    evalx::TransferExperimentConfig cfg;
    cfg.master_seed = kMasterSeed;
    cfg.seeds = kSeeds;
    res = evalx::run_transfer_experiment(data, cfg, [](const std::string& m) { log() << "[3] " << m << '\n'; });
  }
  log() << evalx::transfer_grid(res);
  const double pre = res.rmse_summary("pretrained", 0).mean;
  const double mm50 = res.rmse_summary("metamodel", 50).mean, dd50 = res.rmse_summary("data_driven", 50).mean;
  const double mm200 = res.rmse_summary("metamodel", 200).mean, dd200 = res.rmse_summary("data_driven", 200).mean;
  const double mm1000 = res.rmse_summary("metamodel", 1000).mean, dd1000 = res.rmse_summary("data_driven", 1000).mean;
  const bool a = mm50 < dd50 && mm200 < dd200;
  const bool b = mm50 < pre;
  const double gap = std::abs(dd1000 - mm1000) / mm1000;
  const bool c = gap <= 0.15;
  std::string detail = "(a) " + std::string(a ? "ok" : "FAILED") + " mm/dd@50 " + fmt(mm50, 2) + "/" + fmt(dd50, 2) +
                       " @200 " + fmt(mm200, 2) + "/" + fmt(dd200, 2) + "; (b) " + (b ? "ok" : "FAILED") +
                       " pretrained " + fmt(pre, 2) + " vs mm@50 " + fmt(mm50, 2) + "; (c) " + (c ? "ok" : "FAILED") +
                       " dd@1000 " + fmt(dd1000, 2) + " vs mm@1000 " + fmt(mm1000, 2) + " gap " +
                       fmt(100 * gap, 1) + "%";
  return {a && b && c, detail};
}

// ---------------------------------------------------------------- 4
Outcome pseudo_real_pipeline() {
  pretrain_fidelity_models();
  const auto& models = fidelity_state().models;

  evalx::PseudoDataConfig dcfg;
  dcfg.seed = derive_seed(kMasterSeed, {0x0b5});
  const auto obs = evalx::generate_pseudo_observations(weather(), datagen::SoilLibrary::shipped(), dcfg);

  // The guard must reject a model that has seen an evaluation year.
  bool guard = false;
  {
    auto leaky = models.front();
    leaky.provenance.training_years.push_back(dcfg.years.front());
    try {
      evalx::run_pseudo_real_experiment(std::vector<tensornet::Model>{leaky}, obs, {});
    } catch (const LeakageError&) {
      guard = true;
    }
  }

  evalx::PseudoRealConfig cfg;
  cfg.seeds = kSeeds;
  const auto res = evalx::run_pseudo_real_experiment(models, obs, cfg,
                                                     [](const std::string& m) { log() << "[4] " << m << '\n'; });
  log() << evalx::pseudo_real_summary(res).dump(2) << '\n';
  bool columns = res.summaries.size() == evalx::kPseudoRealModels.size();
  for (const auto& name : evalx::kPseudoRealModels) {
    try {
      columns = columns && res.summary(name).n == obs.size();
    } catch (const ValidationError&) {
      columns = false;
    }
  }
  const double mm_bias = res.summary("metamodel").bias.mean;
  const double crop_bias = res.summary("crop_model").bias.mean;
  const bool bias = std::abs(mm_bias) < 0.5 * std::abs(crop_bias);
  std::string detail = "leakage guard " + std::string(guard ? "ok" : "FAILED") + ", columns " +
                       (columns ? "4/4" : "missing") + ", mean bias metamodel " + fmt(mm_bias, 2) + " vs crop model " +
                       fmt(crop_bias, 2) + " t/ha, rmse metamodel " + fmt(res.summary("metamodel").rmse.mean, 2) +
                       " crop model " + fmt(res.summary("crop_model").rmse.mean, 2) + " data-driven " +
                       fmt(res.summary("data_driven").rmse.mean, 2) + " linear " +
                       fmt(res.summary("linear_regression").rmse.mean, 2) + " (" + std::to_string(obs.size()) +
                       " records)";
  return {guard && columns && bias, detail};
}

// ---------------------------------------------------------------- 5
Outcome metric_oracles() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g;
  double worst_rmse = 0.0, worst_r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng() % 500;
    std::vector<double> p(n), o(n);
    for (std::size_t i = 0; i < n; ++i) {
      o[i] = 40.0 + 8.0 * g(rng);
      p[i] = o[i] + 4.0 * g(rng) + 0.5;
    }
    worst_rmse = std::max(worst_rmse, std::abs(evalx::rmse(p, o) - testing::streaming_rmse(p, o)));
    worst_r = std::max(worst_r, std::abs(evalx::pearson_r(p, o) - testing::streaming_pearson(p, o)));
  }
  const double ex1 = evalx::rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4});
  const double ex2 = evalx::pearson_r(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4});

  // y = 1 + 2x at x = 0, 1, 2 in the precipitation column, other columns varied for full rank.
  std::vector<baselines::LRFeatureRow> rows;
  std::vector<double> y;
  const double others[6][3] = {{0.1, 100, 3}, {0.9, 104, 1}, {0.4, 101, 4}, {0.3, 109, 7}, {0.6, 102, 2}, {0.8, 107, 5}};
  for (int i = 0; i < 6; ++i) {
    baselines::LRFeatureRow r;
    r.earliness = others[i][0];
    r.sowing_doy = others[i][1];
    r.mean_temp = others[i][2];
    r.mean_precip = i % 3;
    rows.push_back(r);
    y.push_back(1.0 + 2.0 * r.mean_precip);
  }
  const auto ols = baselines::fit_ols(rows, y);
  const bool oracles = worst_rmse <= 1e-10 && worst_r <= 1e-10;
  const bool hand = std::abs(ex1 - 3.5355) <= 1e-4 && std::abs(ex2 - 0.9820) <= 1e-4 &&
                    std::abs(ols.coefficients[2] - 2.0) <= 1e-6 && std::abs(ols.coefficients[4] - 1.0) <= 1e-6;
  return {oracles && hand, "max |diff| rmse " + sci(worst_rmse) + " r " + sci(worst_r) +
                               "; rmse " + fmt(ex1) + ", r " + fmt(ex2) + ", OLS slope " + fmt(ols.coefficients[2], 6) +
                               " intercept " + fmt(ols.coefficients[4], 6)};
}

// ---------------------------------------------------------------- 6
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log_file) {
  const std::string cmd = std::string("\"") + AGRIMETA_CLI + "\" " + args + " >>\"" + log_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("agrimeta_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const auto cfg = root / "config.json";
  std::ofstream(cfg) << R"({
    "factorial": {"locations": 3, "years": 4, "soils": 32, "replicates": 3},
    "pretrain": {"train": {"max_epochs": 8}},
    "finetune": {"domain": "sand", "size": 200, "train": {"max_epochs": 5}},
    "evaluate": {"domain": "sand"}
  })";
  const auto logs = root / "cli.log";
  int failures = 0;
  auto pipeline = [&](const std::string& tag) {
    const auto base = root / tag;
    const std::string common = " --seed 2024 --config \"" + cfg.string() + "\"";
    const auto ds = base / "gen" / "dataset.agds";
    const auto model = base / "pre" / "model.agmm";
    failures += run_cli("generate" + common + " --out \"" + (base / "gen").string() + "\"", logs) != 0;
    failures += run_cli("pretrain" + common + " --dataset \"" + ds.string() + "\" --out \"" + (base / "pre").string() + "\"",
                        logs) != 0;
    failures += run_cli("finetune" + common + " --model \"" + model.string() + "\" --dataset \"" + ds.string() +
                            "\" --out \"" + (base / "ft").string() + "\"",
                        logs) != 0;
    failures += run_cli("evaluate" + common + " --model \"" + (base / "ft" / "model.agmm").string() + "\" --dataset \"" +
                            ds.string() + "\" --out \"" + (base / "ev").string() + "\"",
                        logs) != 0;
    return base;
  };
  const auto a = pipeline("run1");
  const auto b = pipeline("run2");
  std::size_t files = 0, differing = 0;
  std::string first_diff;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    ++files;
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  const bool core = fs::exists(a / "gen" / "dataset.agds") && fs::exists(a / "pre" / "model.agmm") &&
                    fs::exists(a / "ft" / "model.agmm") && fs::exists(a / "ev" / "eval_report.json");
  if (failures) log() << "[6] CLI log:\n" << slurp(logs);
  fs::remove_all(root);
  std::string detail = std::to_string(files) + " files compared, " + std::to_string(differing) + " differ";
  if (!first_diff.empty()) detail += " (first: " + first_diff + ")";
  if (failures) detail += ", " + std::to_string(failures) + " CLI invocations failed";
  return {failures == 0 && core && differing == 0 && files > 0, detail};
}

// ---------------------------------------------------------------- 7
Outcome physics_suite() {
  using namespace cropsim;
  const auto& soils = shipped_soil_library();
  std::mt19937_64 rng(707);
  double worst_closure = 0.0;
  int bad_monotone_tuber = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto w = testing::station_weather(1990 + static_cast<int>(rng() % 32), rng(), rng() % 7);
    const auto& soil = soils[rng() % soils.size()];
    const auto mgmt = datagen::sample_management(rng());
    const auto r = run_simulation(w, soil, mgmt, {true});
    double storage = initial_state(SoilProfile(soil), mgmt).storage();
    double prev = 0.0;
    for (const auto& d : *r.daily_trace) {
      const double residual =
          (d.soil_water_mm - storage) - (d.rain + d.irrigation - d.transpiration - d.evaporation - d.drainage);
      worst_closure = std::max(worst_closure, std::abs(residual));
      if (d.tuber_dry_kg_ha < prev) ++bad_monotone_tuber;
      storage = d.soil_water_mm;
      prev = d.tuber_dry_kg_ha;
    }
  }
  const bool closure = worst_closure <= 1e-6 && bad_monotone_tuber == 0;

  const double dark = run_simulation(testing::constant_weather(0.0, 2.0, 20.0, 10.0), testing::shipped_soil(301),
                                     testing::plan(150))
                          .fresh_yield;
  const bool zero_rad = dark == 0.0;

  // N sweep on the leanest sand, irrigation sweep on a drought year.
  const SoilType* lean = nullptr;
  for (const auto& s : soils) {
    if (is_sand(s.code) && (!lean || s.horizons.front().om_frac < lean->horizons.front().om_frac)) lean = &s;
  }
  bool n_monotone = true;
  double n_low = 0.0, n_high = 0.0;
  for (int year : {1995, 2000, 2005}) {
    const auto w = testing::station_weather(year);
    double prev = -1.0;
    for (int k = 0; k < 16; ++k) {
      const double y = run_simulation(w, *lean, testing::plan(300.0 * k / 15.0, 100)).fresh_yield;
      n_monotone = n_monotone && y >= prev;
      if (k == 0) n_low += y;
      if (k == 15) n_high += y;
      prev = y;
    }
  }
  bool irr_monotone = true;
  auto drought = testing::station_weather(2003);
  for (auto& d : drought.days) d.rain *= 0.2;
  for (int code : {301, 310, 205}) {
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
      const double y = run_simulation(drought, testing::shipped_soil(code), testing::plan(200, 30.0 * k)).fresh_yield;
      irr_monotone = irr_monotone && y >= prev;
      prev = y;
    }
  }

  double peat = 0.0, sand = 0.0;
  int np = 0, ns = 0;
  for (int year : {1996, 2001, 2006}) {
    const auto w = testing::station_weather(year);
    for (const auto& soil : soils) {
      for (double n : {60.0, 180.0}) {
        const double y = run_simulation(w, soil, testing::plan(n, 50)).fresh_yield;
        (is_peat(soil.code) ? peat : sand) += y;
        ++(is_peat(soil.code) ? np : ns);
      }
    }
  }
  peat /= np;
  sand /= ns;
  const double contrast = std::abs(peat - sand) / std::max(peat, sand);
  const bool soil_contrast = contrast >= 0.05;

  const bool ok = closure && zero_rad && n_monotone && n_high > n_low && irr_monotone && soil_contrast;
  return {ok, "closure max " + sci(worst_closure) + " mm over 1000 scenarios; zero radiation yield " +
                  fmt(dark, 3) + "; N sweep " + (n_monotone ? "monotone" : "NOT monotone") + "; irrigation sweep " +
                  (irr_monotone ? "monotone" : "NOT monotone") + "; peat " + fmt(peat, 2) + " vs sand " +
                  fmt(sand, 2) + " t/ha (" + fmt(100 * contrast, 1) + "%)"};
}

// ---------------------------------------------------------------- 8
Outcome monitor_semantics() {
  std::mt19937_64 rng(808);
  const testing::MonitorScript script;
  int mismatches = 0, stops = 0, reductions = 0;
  for (int k = 0; k < 50; ++k) {
    const auto losses = testing::synthetic_loss_sequence(rng, 60 + static_cast<int>(rng() % 240));
    const auto expected = testing::replay_monitor(losses, script);
    trainer::MonitorConfig mc;
    mc.initial_lr = script.lr0;
    mc.es_min_delta = script.min_delta_es;
    mc.lr_min_delta = script.min_delta_lr;
    mc.es_patience = script.patience_es;
    mc.lr_patience = script.patience_lr;
    mc.lr_factor = script.factor;
    trainer::PlateauMonitor m(mc);
    m.seed(losses[0]);
    int stop = 0;
    std::vector<int> red;
    for (std::size_t e = 1; e < losses.size(); ++e) {
      const auto d = m.observe(losses[e]);
      if (d.lr_reduced) red.push_back(static_cast<int>(e));
      if (d.stop) {
        stop = static_cast<int>(e);
        break;
      }
    }
    if (stop != expected.stop_epoch || red != expected.reduction_epochs) ++mismatches;
    stops += expected.stop_epoch != 0;
    reductions += static_cast<int>(expected.reduction_epochs.size());
  }
  return {mismatches == 0, std::to_string(50 - mismatches) + "/50 sequences match (" + std::to_string(stops) +
                               " stops, " + std::to_string(reductions) + " reductions exercised)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_correctness},
      {2, "metamodel fidelity", metamodel_fidelity},
      {3, "transfer-learning ordering", transfer_ordering},
      {4, "pseudo-real pipeline", pseudo_real_pipeline},
      {5, "metric oracles", metric_oracles},
      {6, "determinism", determinism},
      {7, "simulator physics", physics_suite},
      {8, "training-monitor semantics", monitor_semantics},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int passed = 0, total = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++total;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    passed += o.pass;
    std::cout << "CRITERION " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << " [" << fmt(secs, 1) << " s]" << std::endl;
    if (c.id == 4) {
      // Criterion 2 models are no longer needed.
      fidelity_state() = FidelityRun{};
    }
  }
  std::cout << "ACCEPTANCE: " << passed << "/" << total << (passed == total ? " PASS" : " FAIL") << std::endl;
  return passed == total ? 0 : 1;
}
