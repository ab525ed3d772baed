#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhqr/scoring.hpp"

namespace dhqr {

// Per-feature standardization statistics fitted on a training set.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct LayerSpec {
  enum class Kind { dense, dropout };
  Kind kind;
  int units = 0;      // dense
  double rate = 0.0;  // dropout, in (0,1)
};

// Hidden dense layers are ReLU; the output is a single linear unit.
struct ArchitectureSpec {
  int input_dim = 0;
  std::vector<LayerSpec> layers;

  static ArchitectureSpec model1(int input_dim);  // dense 64,64,64,32
  static ArchitectureSpec model2(int input_dim);  // dense 64,64 + dropout(0.5) + dense 32
  static ArchitectureSpec model3(int input_dim);  // dense 64,64
  static ArchitectureSpec by_name(const std::string& name, int input_dim);
};

struct Dataset;  // data.hpp

struct NetworkModel {
  ArchitectureSpec arch;
  // Row-major weight matrices (out x in) and bias vectors, one pair per
  // dense layer including the output layer.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<int> dims;  // input_dim, units..., 1
  NormStats norm_stats;
  ScoreParams loss_params{0.5, kInf, kInf};
  std::uint64_t seed = 0;
};

struct TrainConfig {
  double learning_rate = 0.005;
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_score;  // per epoch, mean over batches
  std::vector<double> val_score;    // per epoch, infer mode
  int best_epoch = 0;               // 1-based; 0 means never trained
  int stopped_at = 0;
};

NetworkModel init_network(const ArchitectureSpec& arch, std::uint64_t seed);

enum class ForwardMode { train, infer };

// Single forward pass. Train mode applies inverted dropout with masks drawn
// from mask_seed; infer mode is deterministic.
double forward(const NetworkModel& m, const std::vector<double>& features,
               ForwardMode mode, std::uint64_t mask_seed = 0);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Mean huber_quantile_score over the batch and its gradients w.r.t. every
// parameter, reverse mode with the analytic output subgradient. Dropout
// masks (train mode) are drawn from mask_seed.
std::pair<double, Gradients> loss_and_gradients(
    const NetworkModel& m, const std::vector<std::vector<double>>& features,
    const std::vector<double>& targets, const ScoreParams& p, ForwardMode mode,
    std::uint64_t mask_seed = 0);

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState init_adam(const NetworkModel& m);

void adam_step(NetworkModel& m, const Gradients& g, AdamState& state,
               const TrainConfig& cfg, long step);

std::pair<NetworkModel, TrainReport> train_early_stopping(
    const std::vector<std::vector<double>>& train_x,
    const std::vector<double>& train_y,
    const std::vector<std::vector<double>>& val_x,
    const std::vector<double>& val_y, const ArchitectureSpec& arch,
    const ScoreParams& p, const TrainConfig& cfg);

NetworkModel refit_fixed_epochs(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y,
                                const ArchitectureSpec& arch,
                                const ScoreParams& p, const TrainConfig& cfg,
                                int epochs);

// Infer-mode predictions over raw feature rows; each row is standardized
// with m.norm_stats before the forward pass.
std::vector<double> predict_batch(const NetworkModel& m,
                                  const std::vector<std::vector<double>>& rows);

// JSON persistence; round-trip reproduces predictions bitwise.
void save_model(const NetworkModel& m, const std::string& path);
NetworkModel load_model(const std::string& path);

}  // namespace dhqr
