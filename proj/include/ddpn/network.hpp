#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddpn/dataset.hpp"
#include "ddpn/errors.hpp"
#include "ddpn/losses.hpp"

namespace ddpn {

struct MLPConfig {
  int input_dim = 1;
  // Empty means a single affine map from inputs to heads (GLM mode).
  std::vector<int> hidden_widths{128, 128, 128, 64};
  int head_count = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

// All trainable parameters live in one flat vector; the accessors hand out
// Eigen views into it. Layer weight matrices are (out x in), column-major.
class MLPWeights {
 public:
  MLPWeights() = default;
  explicit MLPWeights(MLPConfig config);

  const MLPConfig& config() const { return config_; }
  std::size_t hidden_layers() const { return config_.hidden_widths.size(); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> layer_weight(std::size_t l);
  Eigen::Map<const Eigen::MatrixXd> layer_weight(std::size_t l) const;
  Eigen::Map<Eigen::VectorXd> layer_bias(std::size_t l);
  Eigen::Map<const Eigen::VectorXd> layer_bias(std::size_t l) const;
  // Row k holds the weights of head k (0: location, 1: dispersion).
  Eigen::Map<Eigen::MatrixXd> head_weight();
  Eigen::Map<const Eigen::MatrixXd> head_weight() const;
  Eigen::Map<Eigen::VectorXd> head_bias();
  Eigen::Map<const Eigen::VectorXd> head_bias() const;

  // Input standardization, applied before the first layer: (x - shift) / scale.
  Eigen::VectorXd feature_shift;
  Eigen::VectorXd feature_scale;

  bool operator==(const MLPWeights& other) const;

 private:
  struct Block {
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
  };
  MLPConfig config_;
  Eigen::VectorXd params_;
  std::vector<Block> weight_blocks_;
  std::vector<Block> bias_blocks_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias, drawn in
// layer order from a generator seeded with config.seed. The dispersion head
// bias (head 1) is then overwritten with `dispersion_bias_init`.
MLPWeights init_mlp(const MLPConfig& config, double dispersion_bias_init = 0.0);

HeadOutput forward(const MLPWeights& weights, std::span<const double> x);

// Raw features (dim x n) to head outputs (head_count x n).
Eigen::MatrixXd forward_batch(const MLPWeights& weights, const Eigen::MatrixXd& x);

Eigen::MatrixXd feature_matrix(const Dataset& ds);
Eigen::MatrixXd feature_matrix(const Dataset& ds, std::span<const std::size_t> rows);

struct BackwardResult {
  MLPWeights gradient;  // mean over the batch
  double loss = 0.0;    // mean over the batch
};

// Throws NumericDivergence naming the offending batch index.
BackwardResult backward(const MLPWeights& weights, const Eigen::MatrixXd& x,
                        std::span<const double> y, const LossSpec& loss);

// Mean loss without gradients.
double evaluate_loss(const MLPWeights& weights, const Dataset& ds, const LossSpec& loss);

struct TrainConfig {
  LossSpec loss;
  int epochs = 200;
  int batch_size = 32;
  double lr0 = 1e-3;
  double weight_decay = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;  // shuffling stream
  double gamma_bias_init = 0.0;
  bool standardize_features = true;
  // Checkpoint selection on the beta = 0 likelihood instead of the training objective.
  bool select_on_unscaled_nll = false;

  void validate(std::size_t train_size) const;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch
  int best_epoch = 0;              // 1-based
  double best_val_loss = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  MLPWeights final_weights;
  MLPWeights best_weights;
  std::map<std::string, std::string> config_echo;
};

class TrainingDiverged : public NumericDivergence {
 public:
  TrainingDiverged(const std::string& what, TrainReport partial)
      : NumericDivergence(what), partial_(std::move(partial)) {}
  const TrainReport& partial() const { return partial_; }

 private:
  TrainReport partial_;
};

// lr0 * (1 + cos(pi t / T)) / 2
double cosine_lr(double t, double total, double lr0);

// Called after every epoch with the 1-based epoch number and the current weights.
using EpochCallback = std::function<void(int epoch, const MLPWeights& weights)>;

// AdamW with decoupled weight decay, cosine decay per epoch, best-validation
// checkpointing. Deterministic for fixed seeds.
std::pair<MLPWeights, TrainReport> train(const Dataset& train_set, const Dataset& val_set,
                                         const MLPConfig& arch, const TrainConfig& config,
                                         const EpochCallback& on_epoch = {});

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  MLPWeights weights;
  LossSpec loss;
  std::map<std::string, std::string> extra;  // free-form provenance
};

std::string checkpoint_string(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string train_report_json(const TrainReport& report, bool include_wall_time = true);

}  // namespace ddpn
