#pragma once

#include <cstddef>

namespace agrimeta::trainer {

struct MonitorConfig {
  double initial_lr = 0.001;
  double es_min_delta = 0.001;
  int es_patience = 20;
  double lr_factor = 0.5;
  double lr_min_delta = 0.001;
  int lr_patience = 10;
};

struct MonitorDecision {
  bool stop = false;        // early stopping triggered after this epoch
  bool lr_reduced = false;  // learning rate for the next epoch was multiplied by lr_factor
  double lr = 0.0;          // learning rate to use for the next epoch
};

// Early stopping plus reduce-on-plateau over a validation-loss stream.
//
// An epoch improves on a rule when val < best - min_delta; the rule's
// reference `best` only moves on improvement. The stop counter resets on
// improvement only. The plateau counter resets on improvement and after every
// reduction. The stop check precedes the reduction check, so the epoch that
// stops training never also reduces the rate. The loss measured before the
// first epoch seeds both references.
class PlateauMonitor {
 public:
  explicit PlateauMonitor(const MonitorConfig& config);

  void seed(double initial_val_loss);
  MonitorDecision observe(double val_loss);

  double lr() const { return lr_; }
  int epoch() const { return epoch_; }

 private:
  MonitorConfig config_;
  double lr_;
  double es_best_;
  double lr_best_;
  int es_wait_ = 0;
  int lr_wait_ = 0;
  int epoch_ = 0;
  bool stopped_ = false;
};

}  // namespace agrimeta::trainer
