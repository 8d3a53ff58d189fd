#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>


namespace fs = std::filesystem;

namespace {

struct CliRun {
  int rc = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("agrimeta_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun cli(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + AGRIMETA_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  static std::string data(const std::string& name) { return (fs::path(AGRIMETA_DATA_DIR) / name).string(); }

  fs::path dir_;
};

const char* kTinyConfig = R"({
  "factorial": {"locations": 2, "years": 3, "soils": 32, "replicates": 2},
  "pretrain": {"train": {"max_epochs": 4}},
  "finetune": {"domain": "sand", "size": 100, "train": {"max_epochs": 3}},
  "evaluate": {}
})";

}  // namespace

TEST_F(CliTest, SimulatePrintsYieldAndWritesTrace) {
  const auto trace = dir_ / "trace.csv";
  const auto r = cli("simulate --weather " + data("L1_2000.csv") + " --soil " + data("soil.json") + " --mgmt " +
                     data("mgmt.json") + " --trace " + trace.string());
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.out.find("fresh_yield_t_ha"), std::string::npos);
  EXPECT_NE(r.out.find("harvest_doy"), std::string::npos);
  const auto mgmt = nlohmann::json::parse(slurp(data("mgmt.json")));
  const int sowing = mgmt.at("sowing_doy").get<int>();
  const auto text = slurp(trace);
  const auto lines = std::count(text.begin(), text.end(), '\n');
  // Header plus one row per day from sowing to harvest.
  const auto pos = r.out.find("harvest_doy");
  const int harvest = std::stoi(r.out.substr(r.out.find_first_of("0123456789", pos)));
  EXPECT_EQ(lines, 1 + harvest - sowing + 1);
}

TEST_F(CliTest, SimulateRejectsInvalidWeather) {
  auto text = slurp(data("L1_2000.csv"));
  // Swap tmax and tmin on the first data row so tmax < tmin.
  std::istringstream in(text);
  std::string header, first, rest, line;
  std::getline(in, header);
  std::getline(in, first);
  while (std::getline(in, line)) rest += line + "\n";
  std::vector<std::string> cells;
  std::stringstream ss(first);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 5u);
  std::swap(cells[3], cells[4]);
  if (std::stod(cells[3]) >= std::stod(cells[4])) cells[4] = std::to_string(std::stod(cells[3]) + 5.0);
  std::string bad = header + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) bad += (i ? "," : "") + cells[i];
  bad += "\n" + rest;
  const auto w = write("L1_2000.csv", bad);
  const auto r = cli("simulate --weather " + w.string() + " --soil " + data("soil.json") + " --mgmt " + data("mgmt.json"));
  EXPECT_EQ(r.rc, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, UsageErrorsExitWithOne) {
  EXPECT_EQ(cli("").rc, 1);
  EXPECT_EQ(cli("frobnicate").rc, 1);
  const auto cfg = write("c.json", kTinyConfig);
  EXPECT_EQ(cli("generate --config " + cfg.string() + " --out " + (dir_ / "x").string()).rc, 1);  // no seed
  const auto bad = write("bad.json", R"({"seed": 1, "factorial": {"locations": 2, "colour": 3}})");
  EXPECT_EQ(cli("generate --config " + bad.string() + " --out " + (dir_ / "y").string()).rc, 1);
  EXPECT_EQ(cli("--version").rc, 0);
}

TEST_F(CliTest, PipelineIsByteIdenticalAcrossRuns) {
  const auto cfg = write("c.json", kTinyConfig);
  auto pipeline = [&](const std::string& tag) {
    const auto base = dir_ / tag;
    const std::string common = " --seed 42 --config " + cfg.string();
    EXPECT_EQ(cli("generate" + common + " --out " + (base / "gen").string()).rc, 0);
    const auto ds = (base / "gen" / "dataset.agds").string();
    EXPECT_EQ(cli("pretrain" + common + " --dataset " + ds + " --out " + (base / "pre").string()).rc, 0);
    const auto model = (base / "pre" / "model.agmm").string();
    EXPECT_EQ(cli("finetune" + common + " --model " + model + " --dataset " + ds + " --out " + (base / "ft").string()).rc,
              0);
    EXPECT_EQ(cli("evaluate" + common + " --model " + model + " --dataset " + ds + " --split validation --out " +
                  (base / "ev").string())
                  .rc,
              0);
    return base;
  };
  const auto a = pipeline("a");
  const auto b = pipeline("b");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 12u);

  // Scoring the pretrained model on its own hold-out reproduces the training report.
  const auto report = nlohmann::json::parse(slurp(a / "pre" / "train_report.json"));
  const auto eval = nlohmann::json::parse(slurp(a / "ev" / "eval_report.json"));
  EXPECT_NEAR(eval.at("rmse_t_ha").get<double>(), report.at("best_val_rmse_t_ha").get<double>(), 1e-9);

  const auto manifest = nlohmann::json::parse(slurp(a / "pre" / "manifest.json"));
  EXPECT_EQ(manifest.at("seed"), 42);
  EXPECT_FALSE(manifest.at("outputs").empty());
}

TEST_F(CliTest, MismatchedUpstreamSeedWarns) {
  const auto cfg = write("c.json", kTinyConfig);
  ASSERT_EQ(cli("generate --seed 1 --config " + cfg.string() + " --out " + (dir_ / "g").string()).rc, 0);
  const auto r = cli("pretrain --seed 2 --config " + cfg.string() + " --dataset " + (dir_ / "g" / "dataset.agds").string() +
                     " --out " + (dir_ / "p").string());
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
}

TEST_F(CliTest, ReducedTransferExperimentPrintsGrid) {
  const auto cfg = write("t.json", R"({
    "factorial": {"locations": 4, "years": 8, "soils": 32, "replicates": 8},
    "transfer": {"pretrain_size": 2000, "holdout_size": 3000, "seeds": [1],
                 "pretrain": {"max_epochs": 2}, "finetune": {"max_epochs": 2}, "baseline": {"max_epochs": 2}}
  })");
  const auto out = dir_ / "tr";
  const auto r = cli("experiment transfer --seed 42 --config " + cfg.string() + " --out " + out.string());
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.out.find("pretrained"), std::string::npos);
  EXPECT_NE(r.out.find("metamodel"), std::string::npos);
  EXPECT_NE(r.out.find("data_driven"), std::string::npos);
  for (const char* f : {"transfer_results.csv", "transfer_summary.json", "transfer_grid.txt", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto csv = slurp(out / "transfer_results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 1 + 2 * 3);
}
