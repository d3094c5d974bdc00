#include "ddpn/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ddpn/distributions.hpp"
#include "ddpn/io.hpp"
#include "ddpn/text.hpp"

namespace ddpn {

namespace {

constexpr const char* kCheckpointMagic = "ddpnkit-ckpt v1";

HeadOutput head_output_from_column(const Eigen::MatrixXd& out, Eigen::Index col) {
  HeadOutput h;
  h.location = out(0, col);
  if (out.rows() > 1) h.log_dispersion = out(1, col);
  return h;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

void MLPConfig::validate() const {
  if (input_dim < 1) throw ShapeError("input_dim must be positive");
  if (head_count < 1 || head_count > 2) throw ShapeError("head_count must be 1 or 2");
  for (int w : hidden_widths) {
    if (w < 1) throw ShapeError("hidden widths must be positive");
  }
}

MLPWeights::MLPWeights(MLPConfig config) : config_(std::move(config)) {
  config_.validate();
  Eigen::Index offset = 0;
  Eigen::Index in = config_.input_dim;
  auto add = [&](Eigen::Index rows, Eigen::Index cols) {
    weight_blocks_.push_back({offset, rows, cols});
    offset += rows * cols;
    bias_blocks_.push_back({offset, rows, 1});
    offset += rows;
  };
  for (int w : config_.hidden_widths) {
    add(w, in);
    in = w;
  }
  add(config_.head_count, in);
  params_ = Eigen::VectorXd::Zero(offset);
  feature_shift = Eigen::VectorXd::Zero(config_.input_dim);
  feature_scale = Eigen::VectorXd::Ones(config_.input_dim);
}

Eigen::Map<Eigen::MatrixXd> MLPWeights::layer_weight(std::size_t l) {
  const auto& b = weight_blocks_.at(l);
  return {params_.data() + b.offset, b.rows, b.cols};
}
Eigen::Map<const Eigen::MatrixXd> MLPWeights::layer_weight(std::size_t l) const {
  const auto& b = weight_blocks_.at(l);
  return {params_.data() + b.offset, b.rows, b.cols};
}
Eigen::Map<Eigen::VectorXd> MLPWeights::layer_bias(std::size_t l) {
  const auto& b = bias_blocks_.at(l);
  return {params_.data() + b.offset, b.rows};
}
Eigen::Map<const Eigen::VectorXd> MLPWeights::layer_bias(std::size_t l) const {
  const auto& b = bias_blocks_.at(l);
  return {params_.data() + b.offset, b.rows};
}
Eigen::Map<Eigen::MatrixXd> MLPWeights::head_weight() { return layer_weight(hidden_layers()); }
Eigen::Map<const Eigen::MatrixXd> MLPWeights::head_weight() const {
  return layer_weight(hidden_layers());
}
Eigen::Map<Eigen::VectorXd> MLPWeights::head_bias() { return layer_bias(hidden_layers()); }
Eigen::Map<const Eigen::VectorXd> MLPWeights::head_bias() const {
  return layer_bias(hidden_layers());
}

bool MLPWeights::operator==(const MLPWeights& other) const {
  return config_.input_dim == other.config_.input_dim &&
         config_.hidden_widths == other.config_.hidden_widths &&
         config_.head_count == other.config_.head_count && params_ == other.params_ &&
         feature_shift == other.feature_shift && feature_scale == other.feature_scale;
}

MLPWeights init_mlp(const MLPConfig& config, double dispersion_bias_init) {
  MLPWeights w(config);
  Rng rng(config.seed);
  for (std::size_t l = 0; l <= w.hidden_layers(); ++l) {
    auto W = w.layer_weight(l);
    auto b = w.layer_bias(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(W.cols()));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = unif(rng);
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = unif(rng);
  }
  if (config.head_count > 1) w.head_bias()(1) = dispersion_bias_init;
  return w;
}

Eigen::MatrixXd forward_batch(const MLPWeights& weights, const Eigen::MatrixXd& x) {
  if (x.rows() != weights.config().input_dim) {
    throw ShapeError("expected " + std::to_string(weights.config().input_dim) +
                     " features, got " + std::to_string(x.rows()));
  }
  Eigen::MatrixXd a = (x.colwise() - weights.feature_shift).array().colwise() /
                      weights.feature_scale.array();
  for (std::size_t l = 0; l < weights.hidden_layers(); ++l) {
    a = ((weights.layer_weight(l) * a).colwise() + weights.layer_bias(l)).cwiseMax(0.0);
  }
  return (weights.head_weight() * a).colwise() + weights.head_bias();
}

HeadOutput forward(const MLPWeights& weights, std::span<const double> x) {
  const Eigen::MatrixXd col =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return head_output_from_column(forward_batch(weights, col), 0);
}

Eigen::MatrixXd feature_matrix(const Dataset& ds) {
  ds.validate();
  Eigen::MatrixXd x(ds.dim, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.row(i);
    for (int k = 0; k < ds.dim; ++k) x(k, static_cast<Eigen::Index>(i)) = row[k];
  }
  return x;
}

Eigen::MatrixXd feature_matrix(const Dataset& ds, std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(ds.dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = ds.row(rows[i]);
    for (int k = 0; k < ds.dim; ++k) x(k, static_cast<Eigen::Index>(i)) = row[k];
  }
  return x;
}

BackwardResult backward(const MLPWeights& weights, const Eigen::MatrixXd& x,
                        std::span<const double> y, const LossSpec& loss) {
  const Eigen::Index n = x.cols();
  if (n == 0) throw ShapeError("backward needs a nonempty batch");
  if (static_cast<std::size_t>(n) != y.size()) throw ShapeError("batch labels and inputs differ");
  if (x.rows() != weights.config().input_dim) throw ShapeError("batch feature width mismatch");
  if (weights.config().head_count != head_count(loss.family)) {
    throw ShapeError("network head count does not match the loss family");
  }

  const std::size_t layers = weights.hidden_layers();
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers + 1);
  acts.push_back((x.colwise() - weights.feature_shift).array().colwise() /
                 weights.feature_scale.array());
  for (std::size_t l = 0; l < layers; ++l) {
    acts.push_back(
        ((weights.layer_weight(l) * acts.back()).colwise() + weights.layer_bias(l)).cwiseMax(0.0));
  }
  const Eigen::MatrixXd out = (weights.head_weight() * acts.back()).colwise() + weights.head_bias();

  Eigen::MatrixXd delta(out.rows(), n);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto hl = head_loss(loss, y[static_cast<std::size_t>(i)], head_output_from_column(out, i));
    if (!std::isfinite(hl.value) || !std::isfinite(hl.d_location) ||
        !std::isfinite(hl.d_log_dispersion)) {
      throw NumericDivergence("non-finite loss at batch index " + std::to_string(i));
    }
    total += hl.value;
    delta(0, i) = hl.d_location * inv_n;
    if (out.rows() > 1) delta(1, i) = hl.d_log_dispersion * inv_n;
  }

  BackwardResult res{MLPWeights(weights.config()), total * inv_n};
  MLPWeights& g = res.gradient;
  g.feature_shift = weights.feature_shift;
  g.feature_scale = weights.feature_scale;
  g.head_weight() = delta * acts.back().transpose();
  g.head_bias() = delta.rowwise().sum();
  Eigen::MatrixXd upstream = weights.head_weight().transpose() * delta;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd dh = upstream.cwiseProduct((acts[l + 1].array() > 0.0).cast<double>().matrix());
    g.layer_weight(l) = dh * acts[l].transpose();
    g.layer_bias(l) = dh.rowwise().sum();
    if (l > 0) upstream = weights.layer_weight(l).transpose() * dh;
  }
  return res;
}

double evaluate_loss(const MLPWeights& weights, const Dataset& ds, const LossSpec& loss) {
  if (ds.size() == 0) throw ShapeError("cannot evaluate loss on an empty dataset");
  const Eigen::MatrixXd out = forward_batch(weights, feature_matrix(ds));
  double total = 0.0;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    total += head_loss(loss, ds.labels[static_cast<std::size_t>(i)], head_output_from_column(out, i))
                 .value;
  }
  return total / static_cast<double>(out.cols());
}

double cosine_lr(double t, double total, double lr0) {
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t / total));
}

void TrainConfig::validate(std::size_t train_size) const {
  loss.validate();
  if (epochs < 1) throw DomainError("epochs must be positive");
  if (batch_size < 1) throw DomainError("batch_size must be positive");
  if (static_cast<std::size_t>(batch_size) > train_size) {
    throw DomainError("batch_size exceeds the training set size");
  }
  if (!(lr0 >= 0.0)) throw DomainError("lr0 must be nonnegative");
  if (!(weight_decay >= 0.0)) throw DomainError("weight_decay must be nonnegative");
}

std::pair<MLPWeights, TrainReport> train(const Dataset& train_set, const Dataset& val_set,
                                         const MLPConfig& arch, const TrainConfig& config,
                                         const EpochCallback& on_epoch) {
  const auto started = std::chrono::steady_clock::now();
  train_set.validate();
  val_set.validate();
  config.validate(train_set.size());
  if (val_set.size() == 0) throw DomainError("validation set is empty");
  if (arch.input_dim != train_set.dim || val_set.dim != train_set.dim) {
    throw ShapeError("dataset width does not match the network input");
  }
  if (config.loss.family != Family::Gaussian) {
    for (double y : train_set.labels) {
      if (y < 0.0 || std::floor(y) != y) throw DomainError("count labels must be nonneg integers");
    }
  }

  MLPConfig cfg = arch;
  cfg.head_count = head_count(config.loss.family);
  MLPWeights weights = init_mlp(cfg, config.gamma_bias_init);
  const Eigen::MatrixXd x_all = feature_matrix(train_set);
  if (config.standardize_features) {
    const double n = static_cast<double>(train_set.size());
    weights.feature_shift = x_all.rowwise().mean();
    const Eigen::MatrixXd centered = x_all.colwise() - weights.feature_shift;
    weights.feature_scale = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
    for (Eigen::Index k = 0; k < weights.feature_scale.size(); ++k) {
      if (!(weights.feature_scale(k) > 0.0)) weights.feature_scale(k) = 1.0;
    }
  }

  TrainReport report;
  report.seed = config.seed;
  report.config_echo = {
      {"family", std::string(family_name(config.loss.family))},
      {"beta", format_double(config.loss.beta)},
      {"epochs", std::to_string(config.epochs)},
      {"batch_size", std::to_string(config.batch_size)},
      {"lr0", format_double(config.lr0)},
      {"weight_decay", format_double(config.weight_decay)},
      {"gamma_bias_init", format_double(config.gamma_bias_init)},
      {"hidden_widths", join_ints(cfg.hidden_widths)},
      {"init_seed", std::to_string(cfg.seed)},
      {"select_on", config.select_on_unscaled_nll ? "nll" : "objective"},
  };

  const LossSpec selection_loss =
      config.select_on_unscaled_nll ? LossSpec{config.loss.family, 0.0} : config.loss;

  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(weights.params().size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(weights.params().size());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(config.seed);
  std::int64_t step = 0;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  report.best_weights = weights;

  std::vector<double> batch_y;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      batch_y.clear();
      for (std::size_t r : rows) batch_y.push_back(train_set.labels[r]);
      BackwardResult br;
      try {
        br = backward(weights, feature_matrix(train_set, rows), batch_y, config.loss);
      } catch (const NumericDivergence& e) {
        report.final_weights = weights;
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        throw TrainingDiverged("epoch " + std::to_string(epoch + 1) + ": " + e.what(),
                               std::move(report));
      }
      epoch_loss += br.loss * static_cast<double>(rows.size());

      ++step;
      const Eigen::VectorXd& g = br.gradient.params();
      m1 = config.adam_beta1 * m1 + (1.0 - config.adam_beta1) * g;
      m2 = config.adam_beta2 * m2 + (1.0 - config.adam_beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      Eigen::VectorXd& p = weights.params();
      p *= 1.0 - lr * config.weight_decay;
      p.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + config.adam_eps);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train_set.size()));
    const double val = evaluate_loss(weights, val_set, selection_loss);
    if (!std::isfinite(val)) {
      report.final_weights = weights;
      throw TrainingDiverged("non-finite validation loss at epoch " + std::to_string(epoch + 1),
                             std::move(report));
    }
    report.val_loss.push_back(val);
    if (val < report.best_val_loss) {
      report.best_val_loss = val;
      report.best_epoch = epoch + 1;
      report.best_weights = weights;
    }
    if (on_epoch) on_epoch(epoch + 1, weights);
  }
  report.final_weights = weights;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {report.best_weights, std::move(report)};
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_tensor(std::ostringstream& os, const std::string& name, const double* data,
                  Eigen::Index rows, Eigen::Index cols) {
  os << "tensor " << name << ' ' << rows << ' ' << cols << '\n';
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j) os << ' ';
      os << format_double(data[j * rows + i]);
    }
    os << '\n';
  }
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (const auto& f : split(s, ',')) out.push_back(static_cast<int>(parse_int(f)));
  return out;
}

}  // namespace

std::string checkpoint_string(const Checkpoint& ckpt) {
  const auto& w = ckpt.weights;
  const auto& c = w.config();
  std::ostringstream os;
  os << kCheckpointMagic << '\n';
  os << "input_dim=" << c.input_dim << '\n';
  os << "hidden_widths=" << join_ints(c.hidden_widths) << '\n';
  os << "head_count=" << c.head_count << '\n';
  os << "seed=" << c.seed << '\n';
  os << "family=" << family_name(ckpt.loss.family) << '\n';
  os << "beta=" << format_double(ckpt.loss.beta) << '\n';
  for (const auto& [k, v] : ckpt.extra) os << "extra." << k << '=' << v << '\n';
  write_tensor(os, "feature_shift", w.feature_shift.data(), w.feature_shift.size(), 1);
  write_tensor(os, "feature_scale", w.feature_scale.data(), w.feature_scale.size(), 1);
  for (std::size_t l = 0; l <= w.hidden_layers(); ++l) {
    const std::string prefix = l == w.hidden_layers() ? "head" : "layer" + std::to_string(l);
    const auto W = w.layer_weight(l);
    const auto b = w.layer_bias(l);
    write_tensor(os, prefix + ".weight", W.data(), W.rows(), W.cols());
    write_tensor(os, prefix + ".bias", b.data(), b.size(), 1);
  }
  return os.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || trim(line) != kCheckpointMagic) {
    throw IoError("not a ddpnkit v1 checkpoint");
  }
  std::map<std::string, std::string> kv;
  std::map<std::string, std::string> extra;
  std::map<std::string, Eigen::MatrixXd> tensors;
  std::vector<std::string> tensor_order;
  while (std::getline(is, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.rfind("tensor ", 0) == 0) {
      const auto parts = split(t, ' ');
      if (parts.size() != 4) throw IoError("malformed tensor header: " + std::string(t));
      const auto rows = static_cast<Eigen::Index>(parse_int(parts[2]));
      const auto cols = static_cast<Eigen::Index>(parse_int(parts[3]));
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(is, line)) throw IoError("truncated tensor " + parts[1]);
        const auto vals = split(trim(line), ' ');
        if (static_cast<Eigen::Index>(vals.size()) != cols) {
          throw IoError("tensor " + parts[1] + " row has wrong width");
        }
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = parse_double(vals[j]);
      }
      tensors[parts[1]] = std::move(m);
      tensor_order.push_back(parts[1]);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw IoError("malformed checkpoint line: " + std::string(t));
    const std::string key(t.substr(0, eq));
    const std::string val(t.substr(eq + 1));
    if (key.rfind("extra.", 0) == 0) {
      extra[key.substr(6)] = val;
    } else {
      kv[key] = val;
    }
  }
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw IoError("checkpoint missing key '" + k + "'");
    return it->second;
  };
  MLPConfig cfg;
  cfg.input_dim = static_cast<int>(parse_int(need("input_dim")));
  cfg.hidden_widths = parse_widths(need("hidden_widths"));
  cfg.head_count = static_cast<int>(parse_int(need("head_count")));
  cfg.seed = static_cast<std::uint64_t>(parse_int(need("seed")));
  Checkpoint ckpt{MLPWeights(cfg), LossSpec{parse_family(need("family")), parse_double(need("beta"))},
                  extra};
  auto take = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("checkpoint missing tensor '" + name + "'");
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw IoError("tensor '" + name + "' has the wrong shape");
    }
    return it->second;
  };
  auto& w = ckpt.weights;
  w.feature_shift = take("feature_shift", cfg.input_dim, 1);
  w.feature_scale = take("feature_scale", cfg.input_dim, 1);
  for (std::size_t l = 0; l <= w.hidden_layers(); ++l) {
    const std::string prefix = l == w.hidden_layers() ? "head" : "layer" + std::to_string(l);
    auto W = w.layer_weight(l);
    auto b = w.layer_bias(l);
    W = take(prefix + ".weight", W.rows(), W.cols());
    b = take(prefix + ".bias", b.size(), 1);
  }
  if (tensors.size() != 2 * (w.hidden_layers() + 1) + 2) {
    throw IoError("checkpoint has unexpected extra tensors");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, checkpoint_string(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

std::string train_report_json(const TrainReport& report, bool include_wall_time) {
  nlohmann::ordered_json j;
  j["best_epoch"] = report.best_epoch;
  j["best_val_loss"] = report.best_val_loss;
  j["seed"] = report.seed;
  j["train_loss"] = report.train_loss;
  j["val_loss"] = report.val_loss;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : report.config_echo) cfg[k] = v;
  j["config"] = cfg;
  if (include_wall_time) j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace ddpn
