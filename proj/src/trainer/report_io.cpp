#include "agrimeta/trainer/report_io.hpp"

#include <fstream>
#include <sstream>

#include "agrimeta/error.hpp"

namespace agrimeta::trainer {

std::string history_csv(const TrainReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss,lr\n";
  for (const auto& r : report.history) {
    out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr << '\n';
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << history_csv(report);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json summary_json(const TrainReport& report) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : report.history) {
    history.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}, {"lr", r.lr}});
  }
  return {{"epochs_run", report.epochs_run},
          {"best_epoch", report.best_epoch},
          {"best_val_loss", report.best_val_loss},
          {"initial_val_loss", report.initial_val_loss},
          {"best_val_rmse_t_ha", report.best_val_rmse},
          {"early_stopped", report.early_stopped},
          {"train_size", report.train_size},
          {"val_size", report.val_size},
          {"history", history}};
}

TrainReport report_from_json(const nlohmann::json& j) {
  TrainReport r;
  try {
    r.epochs_run = j.at("epochs_run").get<int>();
    r.best_epoch = j.at("best_epoch").get<int>();
    r.best_val_loss = j.at("best_val_loss").get<double>();
    r.initial_val_loss = j.at("initial_val_loss").get<double>();
    r.best_val_rmse = j.at("best_val_rmse_t_ha").get<double>();
    r.early_stopped = j.at("early_stopped").get<bool>();
    r.train_size = j.at("train_size").get<std::size_t>();
    r.val_size = j.at("val_size").get<std::size_t>();
    for (const auto& h : j.at("history")) {
      r.history.push_back({h.at("epoch").get<int>(), h.at("train_loss").get<double>(),
                           h.at("val_loss").get<double>(), h.at("lr").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train report: ") + e.what());
  }
  return r;
}

}  // namespace agrimeta::trainer
