#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cwb/csiva.hpp"
#include "cwb/schedule.hpp"
#include "cwb/scm.hpp"

namespace cwb {

struct TrainConfig {
  std::string name = "model";
  double learning_rate = 1e-4;
  int batch_size = 5;
  int max_epochs = 25;
  int patience = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  // Global-norm gradient clip; not part of the original protocol, recorded
  // in the curve metadata.
  double grad_clip_norm = 5.0;
  ModelConfig model;
  // Informational record of the training mixture; ratios validated when set.
  std::vector<std::pair<std::string, double>> mixture;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_nll = 0.0;
  double val_nll = 0.0;
};

struct Checkpoint {
  Parameters params;
  TrainConfig config;
  std::vector<EpochStats> curve;
  int best_epoch = 0;  // 1-based epoch whose validation loss is minimal
  std::string model_id;
};

struct AdamState {
  ad::ParamMap m;
  ad::ParamMap v;
  long t = 0;
};

// Standard Adam with bias correction. Throws NumericError on non-finite
// gradients (training divergence).
void adam_step(ad::ParamMap& params, const ad::ParamMap& grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

// Maximum-likelihood training: deterministic validation split, shuffled
// without-replacement batches, early stopping on validation loss with the
// configured patience, best-epoch parameters returned.
Checkpoint train_model(const TrainConfig& config, const std::vector<Dataset>& corpus,
                       int workers);

// Checkpoint file: one ASCII line "CWBCKPT1 <header_bytes>", a JSON header
// (config, curve, parameter manifest with byte offsets), then the raw
// little-endian 64-bit float payload in manifest order.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Curve CSV (epoch, train_nll, val_nll) with metadata comment lines.
void write_curve_csv(const std::string& path, const Checkpoint& ckpt);

}  // namespace cwb
