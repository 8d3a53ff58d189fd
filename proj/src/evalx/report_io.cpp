#include "agrimeta/evalx/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "agrimeta/error.hpp"

namespace agrimeta::evalx {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

std::string transfer_csv(const TransferResults& results) {
  std::ostringstream out;
  out << "model,size,seed,rmse,pearson_r,mean_bias,n_eval,epochs_run\n";
  for (const auto& r : results.rows) {
    out << r.model << ',' << r.size << ',' << r.seed << ',' << num(r.rmse) << ',' << opt_num(r.pearson_r) << ','
        << num(r.mean_bias) << ',' << r.n_eval << ',' << r.epochs_run << '\n';
  }
  return out.str();
}

nlohmann::json transfer_summary(const TransferResults& results) {
  std::map<std::pair<std::string, std::size_t>, std::vector<const TransferRow*>> groups;
  for (const auto& r : results.rows) groups[{r.model, r.size}].push_back(&r);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, rows] : groups) {
    std::vector<double> rm;
    for (const auto* r : rows) rm.push_back(r->rmse);
    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto* r : rows) per_seed.push_back({{"seed", r->seed}, {"rmse", r->rmse}, {"pearson_r", opt_json(r->pearson_r)}});
    cells.push_back({{"model", key.first}, {"size", key.second}, {"rmse", mean_std_json(mean_std(rm))}, {"per_seed", per_seed}});
  }
  return {{"experiment", "transfer"}, {"holdout_size", results.holdout_size}, {"cells", cells}};
}

std::string transfer_grid(const TransferResults& results) {
  std::set<std::size_t> sizes;
  for (const auto& r : results.rows) sizes.insert(r.size);
  std::ostringstream out;
  out << std::left << std::setw(14) << "model";
  for (auto s : sizes) out << std::setw(18) << ("n=" + std::to_string(s));
  out << '\n';
  for (const std::string model : {"pretrained", "metamodel", "data_driven"}) {
    out << std::setw(14) << model;
    for (auto s : sizes) {
      const auto v = results.rmse_of(model, s);
      if (v.empty()) {
        out << std::setw(18) << "-";
        continue;
      }
      const auto m = mean_std(v);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << m.mean << " (" << m.std << ")";
      out << std::setw(18) << cell.str();
    }
    out << '\n';
  }
  return out.str();
}

std::string pseudo_real_csv(const PseudoRealResults& results) {
  std::ostringstream out;
  out << "model,fold_year,seed,n,rmse,mean_bias\n";
  for (const auto& r : results.rows) {
    out << r.model << ',' << r.fold_year << ',' << r.seed << ',' << r.n << ',' << num(r.rmse) << ','
        << num(r.mean_bias) << '\n';
  }
  return out.str();
}

nlohmann::json pseudo_real_summary(const PseudoRealResults& results) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& s : results.summaries) {
    models.push_back({{"model", s.model},
                      {"n", s.n},
                      {"rmse", mean_std_json(s.rmse)},
                      {"pearson_r", mean_std_json(s.r)},
                      {"mean_bias", mean_std_json(s.bias)}});
  }
  return {{"experiment", "pseudo-real"}, {"validation", "leave-one-year-out"}, {"models", models}};
}

std::string eval_pairs_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "prediction,observation\n";
  for (const auto& [p, o] : report.pairs) out << num(p) << ',' << num(o) << '\n';
  return out.str();
}

nlohmann::json to_json(const EvalReport& report) {
  return {{"model_id", report.model_id}, {"dataset_id", report.dataset_id}, {"rmse_t_ha", report.rmse},
          {"pearson_r", opt_json(report.pearson_r)}, {"mean_bias", report.mean_bias}, {"n", report.n}};
}

std::string scatter_svg(const std::string& title, std::span<const std::pair<double, double>> pairs) {
  constexpr double kSize = 420.0, kMargin = 50.0;
  double lo = 0.0, hi = 1.0;
  for (const auto& [p, o] : pairs) hi = std::max({hi, p, o});
  for (const auto& [p, o] : pairs) lo = std::min({lo, p, o});
  hi = std::ceil(hi / 10.0) * 10.0;
  const double span = hi - lo;
  auto sx = [&](double v) { return kMargin + (v - lo) / span * (kSize - 2 * kMargin); };
  auto sy = [&](double v) { return kSize - kMargin - (v - lo) / span * (kSize - 2 * kMargin); };

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << sx(lo) << "\" y1=\"" << sy(lo) << "\" x2=\"" << sx(hi) << "\" y2=\"" << sy(hi)
      << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize - 2 * kMargin << "\" height=\""
      << kSize - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [p, o] : pairs) {
    out << "<circle cx=\"" << sx(o) << "\" cy=\"" << sy(p) << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  }
  out << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "observed fresh yield (t/ha)</text>\n";
  out << "<text x=\"14\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
      << kSize / 2 << ")\">predicted fresh yield (t/ha)</text>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kSize - kMargin + 14 << "\" font-size=\"10\">" << lo << "</text>\n";
  out << "<text x=\"" << kSize - kMargin << "\" y=\"" << kSize - kMargin + 14 << "\" font-size=\"10\" text-anchor=\"end\">"
      << hi << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace agrimeta::evalx
