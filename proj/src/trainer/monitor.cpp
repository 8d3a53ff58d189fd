#include "agrimeta/trainer/monitor.hpp"

#include <limits>

#include "agrimeta/error.hpp"

namespace agrimeta::trainer {

PlateauMonitor::PlateauMonitor(const MonitorConfig& config)
    : config_(config),
      lr_(config.initial_lr),
      es_best_(std::numeric_limits<double>::infinity()),
      lr_best_(std::numeric_limits<double>::infinity()) {
  if (!(config.lr_factor > 0.0 && config.lr_factor < 1.0)) throw ValidationError("lr_factor must be in (0, 1)");
  if (config.es_patience < 1 || config.lr_patience < 1) throw ValidationError("patience values must be >= 1");
  if (!(config.initial_lr > 0.0)) throw ValidationError("initial learning rate must be > 0");
  if (config.es_min_delta < 0.0 || config.lr_min_delta < 0.0) throw ValidationError("min_delta must be >= 0");
}

void PlateauMonitor::seed(double initial_val_loss) {
  es_best_ = initial_val_loss;
  lr_best_ = initial_val_loss;
}

MonitorDecision PlateauMonitor::observe(double val_loss) {
  if (stopped_) throw ValidationError("PlateauMonitor::observe called after stop");
  ++epoch_;
  MonitorDecision d;

  if (val_loss < es_best_ - config_.es_min_delta) {
    es_best_ = val_loss;
    es_wait_ = 0;
  } else if (++es_wait_ >= config_.es_patience) {
    d.stop = true;
    stopped_ = true;
  }

  if (val_loss < lr_best_ - config_.lr_min_delta) {
    lr_best_ = val_loss;
    lr_wait_ = 0;
  } else if (++lr_wait_ >= config_.lr_patience && !d.stop) {
    lr_ *= config_.lr_factor;
    lr_wait_ = 0;
    d.lr_reduced = true;
  }
  d.lr = lr_;
  return d;
}

}  // namespace agrimeta::trainer
