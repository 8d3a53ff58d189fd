#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrimeta/evalx/metrics.hpp"
#include "agrimeta/evalx/pseudo_real_experiment.hpp"
#include "agrimeta/evalx/transfer_experiment.hpp"

namespace agrimeta::evalx {

std::string transfer_csv(const TransferResults& results);
nlohmann::json transfer_summary(const TransferResults& results);
// Table-style grid: one line per model, columns for size 0 and each fine-tune size.
std::string transfer_grid(const TransferResults& results);

std::string pseudo_real_csv(const PseudoRealResults& results);
nlohmann::json pseudo_real_summary(const PseudoRealResults& results);

std::string eval_pairs_csv(const EvalReport& report);
nlohmann::json to_json(const EvalReport& report);

// Prediction-vs-observation scatter with a 1:1 line.
std::string scatter_svg(const std::string& title, std::span<const std::pair<double, double>> pairs);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace agrimeta::evalx
