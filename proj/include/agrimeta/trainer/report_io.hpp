#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "agrimeta/trainer/trainer.hpp"

namespace agrimeta::trainer {

// `epoch,train_loss,val_loss,lr`, one row per completed epoch.
std::string history_csv(const TrainReport& report);
void write_history_csv(const std::filesystem::path& path, const TrainReport& report);

nlohmann::json summary_json(const TrainReport& report);
TrainReport report_from_json(const nlohmann::json& j);

}  // namespace agrimeta::trainer
