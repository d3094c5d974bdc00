#include "ddpn/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"

#include "ddpn/datagen.hpp"
#include "ddpn/dataset.hpp"
#include "ddpn/ensemble.hpp"
#include "ddpn/errors.hpp"
#include "ddpn/io.hpp"
#include "ddpn/metrics.hpp"
#include "ddpn/moments.hpp"
#include "ddpn/network.hpp"
#include "ddpn/ood.hpp"
#include "ddpn/text.hpp"

namespace ddpn {

namespace fs = std::filesystem;

namespace {

// Output files are collected in memory and written together at the end, so a
// command that fails part way leaves nothing behind.
class StagedOutputs {
 public:
  void add(fs::path path, std::string contents) {
    files_.emplace_back(std::move(path), std::move(contents));
  }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, contents] : files_) {
        write_file_atomic(path, contents);
        written.push_back(path);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
    for (const auto& [path, contents] : files_) std::cout << "wrote " << path.string() << '\n';
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

MomentMode parse_variance_mode(const std::string& s) {
  if (s == "efron") return MomentMode::EfronApprox;
  if (s == "exact") return MomentMode::ExactSeries;
  throw UsageError("variance mode must be efron or exact, got '" + s + "'");
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> out;
  if (trim(s).empty() || trim(s) == "none") return out;
  for (const auto& f : split(s, ',')) {
    const long long w = parse_int(trim(f));
    if (w < 1) throw UsageError("hidden widths must be positive");
    out.push_back(static_cast<int>(w));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_double(trim(f)));
  return out;
}

std::string model_stem(Family family, double beta, std::uint64_t seed) {
  std::string stem(family_name(family));
  if ((family == Family::DoublePoisson || family == Family::Gaussian) && beta != 0.0) {
    stem += "_b" + format_double(beta);
  }
  return stem + "_s" + std::to_string(seed);
}

std::string path_stem(const std::string& p) { return fs::path(p).stem().string(); }

bool is_manifest(const fs::path& p) { return p.extension() == ".ensemble"; }

Ensemble load_model(const fs::path& p) {
  if (is_manifest(p)) return load_ensemble(p);
  auto ckpt = load_checkpoint(p);
  std::vector<EnsembleMember> members;
  members.push_back({std::move(ckpt.weights), ckpt.loss});
  return Ensemble(std::move(members));
}

PredictiveDistribution predict(const Ensemble& ens, std::span<const double> x) {
  if (ens.size() == 1) return member_predict(ens.members().front(), x);
  return mixture_predict(ens, x);
}

EvalRecord evaluate_model(const Ensemble& ens, const Dataset& ds, MomentMode mode) {
  std::vector<PredictiveDistribution> dists;
  dists.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) dists.push_back(predict(ens, ds.row(i)));
  return evaluate_predictions(dists, ds.labels, mode);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string process;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  int isolated_repeats = 1;
  double x_lo = 4.0 * std::numbers::pi;
  double x_hi = 6.0 * std::numbers::pi;
  std::string out = ".";
};

void default_sizes(SimulateOptions& o) {
  std::size_t tr = 1600, va = 200, te = 200;
  if (o.process == "sine-conflation") {
    tr = 800, va = 100, te = 100;
  } else if (o.process == "beta-study") {
    tr = 500, va = 100, te = 100;
  } else if (o.process == "sine-shifted") {
    te = 100;
  }
  if (o.n_train == 0) o.n_train = tr;
  if (o.n_val == 0) o.n_val = va;
  if (o.n_test == 0) o.n_test = te;
}

int cmd_simulate(SimulateOptions o) {
  default_sizes(o);
  const fs::path dir = fs::path(o.out) / "data";
  const std::string stem = o.process + "_s" + std::to_string(o.seed);
  StagedOutputs out;
  if (o.process == "sine-shifted") {
    if (!(o.x_lo < o.x_hi)) throw UsageError("--x-lo must be below --x-hi");
    out.add(dir / (stem + "_test.csv"),
            dataset_csv_string(gen_uniform_inputs(o.n_test, o.x_lo, o.x_hi, o.seed)));
    out.commit();
    return kExitOk;
  }
  SplitDatasets sets;
  const std::size_t total = o.n_train + o.n_val + o.n_test;
  if (o.process == "sine-conflation") {
    sets = gen_sine_conflation(o.n_train, o.n_val, o.n_test, o.seed);
  } else if (o.process == "misspec-poisson") {
    sets = split_sequential(gen_misspec_poisson(total, o.seed), o.n_train, o.n_val);
  } else if (o.process == "misspec-nb") {
    sets = split_sequential(gen_misspec_nb(total, o.seed), o.n_train, o.n_val);
  } else if (o.process == "beta-study") {
    sets = split_sequential(gen_beta_study(total, o.seed, 0), o.n_train, o.n_val);
    append_isolated_points(sets.train, o.isolated_repeats);
  } else {
    throw UsageError("unknown process '" + o.process + "'");
  }
  out.add(dir / (stem + "_train.csv"), dataset_csv_string(sets.train));
  out.add(dir / (stem + "_val.csv"), dataset_csv_string(sets.val));
  out.add(dir / (stem + "_test.csv"), dataset_csv_string(sets.test));
  out.commit();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string train_path;
  std::string val_path;
  std::string family = "double_poisson";
  double beta = 0.0;
  int epochs = 200;
  int batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::string hidden = "128,128,128,64";
  std::uint64_t seed = 0;
  double gamma_init = 0.0;
  int members = 1;
  int jobs = 1;
  bool select_on_nll = false;
  bool no_standardize = false;
  std::string out = ".";
};

struct TrainedMember {
  Checkpoint ckpt;
  std::string report_json;
};

TrainedMember train_member(const Dataset& train_set, const Dataset& val_set,
                           const TrainOptions& o, std::uint64_t seed) {
  MLPConfig arch;
  arch.input_dim = train_set.dim;
  arch.hidden_widths = parse_widths(o.hidden);
  arch.seed = seed;
  TrainConfig tc;
  tc.loss = {parse_family(o.family), o.beta};
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.lr0 = o.lr;
  tc.weight_decay = o.weight_decay;
  tc.seed = seed;
  tc.gamma_bias_init = o.gamma_init;
  tc.standardize_features = !o.no_standardize;
  tc.select_on_unscaled_nll = o.select_on_nll;
  auto [weights, report] = train(train_set, val_set, arch, tc);
  Checkpoint ckpt{std::move(weights), tc.loss, {}};
  ckpt.extra["best_epoch"] = std::to_string(report.best_epoch);
  ckpt.extra["train_data"] = fs::path(o.train_path).filename().string();
  // Wall time stays out of the file so reruns are byte-identical.
  std::cout << ("member seed " + std::to_string(seed) + ": best epoch " +
                std::to_string(report.best_epoch) + ", " + format_double(report.wall_seconds) +
                " s\n");
  return {std::move(ckpt), train_report_json(report, false)};
}

int cmd_train(const TrainOptions& o) {
  if (o.members < 1) throw UsageError("--members must be at least 1");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  const Family family = parse_family(o.family);
  LossSpec{family, o.beta}.validate();
  const Dataset train_set = read_dataset_csv(o.train_path);
  const Dataset val_set = read_dataset_csv(o.val_path);

  const auto m = static_cast<std::size_t>(o.members);
  std::vector<TrainedMember> results(m);
  std::vector<std::exception_ptr> errors(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < m; i = next++) {
      try {
        results[i] = train_member(train_set, val_set, o, o.seed + i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(m, static_cast<std::size_t>(o.jobs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path ckpt_dir = fs::path(o.out) / "ckpt";
  const fs::path report_dir = fs::path(o.out) / "reports";
  StagedOutputs out;
  std::vector<fs::path> member_files;
  for (std::size_t i = 0; i < m; ++i) {
    const std::string stem = model_stem(family, o.beta, o.seed + i);
    out.add(ckpt_dir / (stem + ".ckpt"), checkpoint_string(results[i].ckpt));
    out.add(report_dir / ("train_" + stem + ".json"), results[i].report_json);
    member_files.emplace_back(stem + ".ckpt");
  }
  if (m > 1) {
    const fs::path path =
        ckpt_dir / (model_stem(family, o.beta, o.seed) + "_m" + std::to_string(m) + ".ensemble");
    out.add(path, ensemble_manifest_string(family, member_files));
  }
  out.commit();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / ensemble-eval

struct EvalOptions {
  std::string model;
  std::string data;
  std::string variance_mode = "efron";
  std::string out = ".";
};

int cmd_eval(const EvalOptions& o) {
  const MomentMode mode = parse_variance_mode(o.variance_mode);
  const Ensemble ens = load_model(o.model);
  const Dataset ds = read_dataset_csv(o.data);
  const auto rec = evaluate_model(ens, ds, mode);
  StagedOutputs out;
  out.add(fs::path(o.out) / "reports" /
              ("eval_" + path_stem(o.model) + "_" + path_stem(o.data) + ".json"),
          metrics_json(rec));
  out.commit();
  return kExitOk;
}

std::string decomposition_csv(const Ensemble& ens, const Dataset& ds, MomentMode mode) {
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds.row(a)[0] < ds.row(b)[0]; });
  std::ostringstream os;
  os << "x,mean,aleatoric,epistemic,q025,q975,total\n";
  for (std::size_t i : order) {
    const auto x = ds.row(i);
    const auto u = predict_decomposition(ens, x, mode);
    std::vector<double> means;
    for (const auto& m : ens.members()) means.push_back(dist_moments(member_predict(m, x), mode).mean);
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(means.size());
    const auto mix = predict(ens, x);
    os << format_double(x[0]) << ',' << format_double(mean) << ',' << format_double(u.aleatoric)
       << ',' << format_double(u.epistemic) << ',' << format_double(dist_quantile(mix, 0.025))
       << ',' << format_double(dist_quantile(mix, 0.975)) << ',' << format_double(u.total_var)
       << '\n';
  }
  return os.str();
}

int cmd_ensemble_eval(const EvalOptions& o) {
  const MomentMode mode = parse_variance_mode(o.variance_mode);
  const Ensemble ens = load_model(o.model);
  const Dataset ds = read_dataset_csv(o.data);
  const auto rec = evaluate_model(ens, ds, mode);
  const std::string tag = path_stem(o.model) + "_" + path_stem(o.data);
  const fs::path dir = fs::path(o.out) / "reports";
  StagedOutputs out;
  out.add(dir / ("ensemble_eval_" + tag + ".json"), metrics_json(rec));
  out.add(dir / ("decomposition_" + tag + ".csv"), decomposition_csv(ens, ds, mode));
  out.commit();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ood

struct OodOptions {
  std::string model;
  std::string id_path;
  std::string ood_path;
  int repeats = 10;
  double holdout = 0.2;
  int alpha_steps = 201;
  std::uint64_t seed = 0;
  std::string variance_mode = "efron";
  std::string out = ".";
};

int cmd_ood(const OodOptions& o) {
  if (o.alpha_steps < 2) throw UsageError("--alpha-steps must be at least 2");
  OODProtocolConfig cfg;
  cfg.holdout_fraction = o.holdout;
  cfg.n_repeats = o.repeats;
  cfg.seed = o.seed;
  cfg.variance_mode = parse_variance_mode(o.variance_mode);
  for (int k = 0; k < o.alpha_steps; ++k) {
    cfg.alpha_grid.push_back(static_cast<double>(k) / (o.alpha_steps - 1));
  }
  cfg.validate();
  const Ensemble ens = load_model(o.model);
  const auto report =
      run_ood_eval(ens, read_dataset_csv(o.id_path), read_dataset_csv(o.ood_path), cfg);
  StagedOutputs out;
  out.add(fs::path(o.out) / "reports" /
              ("ood_" + path_stem(o.model) + "_" + path_stem(o.ood_path) + ".json"),
          ood_report_json(report));
  out.commit();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// moments-grid

struct GridOptions {
  double mu_lo = 0.01, mu_hi = 100.0;
  double var_lo = 0.01, var_hi = 100.0;
  int n_mu = 41, n_var = 41;
  int terms = kDefaultMdfTerms;
  std::string out = ".";
};

int cmd_moments_grid(const GridOptions& o) {
  if (o.n_mu < 1 || o.n_var < 1) throw UsageError("grid sizes must be positive");
  if (o.terms < 1) throw UsageError("--terms must be positive");
  const auto grid =
      moments_grid(logspace(o.mu_lo, o.mu_hi, o.n_mu), logspace(o.var_lo, o.var_hi, o.n_var),
                   o.terms);
  std::ostringstream os;
  write_moment_grid_csv(os, grid);
  StagedOutputs out;
  out.add(fs::path(o.out) / "reports" / ("moments_grid_t" + std::to_string(o.terms) + ".csv"),
          os.str());
  out.commit();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// attenuation-demo

struct DemoOptions {
  std::string train_path;
  std::string val_path;
  std::size_t n = 500;
  std::size_t n_val = 100;
  int isolated_repeats = 1;
  double beta = 0.0;
  double gamma_init = 0.0;
  int epochs = 1000;
  int batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::string hidden = "128,128,128,64";
  std::string probes = "1,10";
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_attenuation_demo(const DemoOptions& o) {
  SplitDatasets sets;
  if (o.train_path.empty() != o.val_path.empty()) {
    throw UsageError("--train and --val must be given together");
  }
  if (o.train_path.empty()) {
    sets = split_sequential(gen_beta_study(o.n + o.n_val + 1, o.seed, 0), o.n, o.n_val);
    append_isolated_points(sets.train, o.isolated_repeats);
  } else {
    sets.train = read_dataset_csv(o.train_path);
    sets.val = read_dataset_csv(o.val_path);
  }
  const auto probes = parse_doubles(o.probes);
  if (sets.train.dim != 1) throw ShapeError("attenuation-demo expects one feature");

  MLPConfig arch;
  arch.hidden_widths = parse_widths(o.hidden);
  arch.seed = o.seed;
  TrainConfig tc;
  tc.loss = {Family::DoublePoisson, o.beta};
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.lr0 = o.lr;
  tc.weight_decay = o.weight_decay;
  tc.seed = o.seed;
  tc.gamma_bias_init = o.gamma_init;

  std::ostringstream trace;
  trace << "epoch,x,mean,gamma\n";
  auto record = [&](int epoch, const MLPWeights& w) {
    for (double x : probes) {
      const double row[1] = {x};
      const auto head = forward(w, row);
      trace << epoch << ',' << format_double(x) << ',' << format_double(std::exp(head.location))
            << ',' << format_double(std::exp(*head.log_dispersion)) << '\n';
    }
  };
  train(sets.train, sets.val, arch, tc, record);

  const std::string tag = "b" + format_double(o.beta) + "_g" + format_double(o.gamma_init) +
                          "_s" + std::to_string(o.seed);
  StagedOutputs out;
  out.add(fs::path(o.out) / "reports" / ("attenuation_" + tag + ".csv"), trace.str());
  out.commit();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"ddpnkit: Double Poisson count regression, ensembles and uncertainty metrics",
               "ddpnkit"};
  app.set_config("--config", "", "key=value config file; [section] names match subcommands");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  // Lets --config appear after the subcommand name.
  app.fallthrough();

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic dataset and write CSV splits");
  s->add_option("--process", sim.process,
                "sine-conflation | misspec-poisson | misspec-nb | beta-study | sine-shifted")
      ->required();
  s->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  s->add_option("--n-train", sim.n_train, "Training rows (0: process default)");
  s->add_option("--n-val", sim.n_val, "Validation rows (0: process default)");
  s->add_option("--n-test", sim.n_test, "Test rows (0: process default)");
  s->add_option("--isolated-repeats", sim.isolated_repeats,
                "Copies of each isolated beta-study point in the training split")
      ->capture_default_str();
  s->add_option("--x-lo", sim.x_lo, "Lower covariate bound for sine-shifted")->capture_default_str();
  s->add_option("--x-hi", sim.x_hi, "Upper covariate bound for sine-shifted")->capture_default_str();
  s->add_option("--out", sim.out, "Output root (files land in <out>/data)")->capture_default_str();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train one model or an ensemble of independent members");
  t->add_option("--train", tr.train_path, "Training CSV")->required();
  t->add_option("--val", tr.val_path, "Validation CSV")->required();
  t->add_option("--family", tr.family, "double_poisson | poisson | neg_binomial | gaussian")
      ->capture_default_str();
  t->add_option("--beta", tr.beta, "Beta in [0, 1] for double_poisson and gaussian")
      ->capture_default_str();
  t->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
  t->add_option("--batch-size", tr.batch_size, "Minibatch size")->capture_default_str();
  t->add_option("--lr", tr.lr, "Initial learning rate (cosine decay to 0)")->capture_default_str();
  t->add_option("--weight-decay", tr.weight_decay, "Decoupled weight decay")->capture_default_str();
  t->add_option("--hidden", tr.hidden, "Comma-separated hidden widths; 'none' for a GLM")
      ->capture_default_str();
  t->add_option("--seed", tr.seed, "Base seed; member i uses seed + i")->capture_default_str();
  t->add_option("--gamma-init", tr.gamma_init, "Initial bias of the dispersion head")
      ->capture_default_str();
  t->add_option("--members", tr.members, "Ensemble size M")->capture_default_str();
  t->add_option("--jobs", tr.jobs, "Members trained concurrently")->capture_default_str();
  t->add_flag("--select-on-nll", tr.select_on_nll,
              "Pick the best epoch by the beta = 0 likelihood instead of the training objective");
  t->add_flag("--no-standardize", tr.no_standardize, "Skip input standardization");
  t->add_option("--out", tr.out, "Output root (<out>/ckpt, <out>/reports)")->capture_default_str();

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Score a checkpoint or ensemble manifest on a dataset");
  e->add_option("--model", ev.model, "Checkpoint (.ckpt) or ensemble manifest (.ensemble)")
      ->required();
  e->add_option("--data", ev.data, "Dataset CSV")->required();
  e->add_option("--variance-mode", ev.variance_mode, "efron | exact")->capture_default_str();
  e->add_option("--out", ev.out, "Output root (<out>/reports)")->capture_default_str();

  EvalOptions ee;
  auto* en = app.add_subcommand(
      "ensemble-eval", "Ensemble metrics plus a per-input aleatoric/epistemic decomposition CSV");
  en->add_option("--model", ee.model, "Ensemble manifest or checkpoint")->required();
  en->add_option("--data", ee.data, "Dataset CSV")->required();
  en->add_option("--variance-mode", ee.variance_mode, "efron | exact")->capture_default_str();
  en->add_option("--out", ee.out, "Output root (<out>/reports)")->capture_default_str();

  OodOptions oo;
  auto* o = app.add_subcommand("ood", "Quantile-threshold OOD detection with repeated holdouts");
  o->add_option("--model", oo.model, "Ensemble manifest or checkpoint")->required();
  o->add_option("--id", oo.id_path, "In-distribution test CSV")->required();
  o->add_option("--ood", oo.ood_path, "Out-of-distribution CSV")->required();
  o->add_option("--repeats", oo.repeats, "Holdout resamples")->capture_default_str();
  o->add_option("--holdout", oo.holdout, "Fraction of ID data used to fit thresholds")
      ->capture_default_str();
  o->add_option("--alpha-steps", oo.alpha_steps, "Evenly spaced alpha values in [0, 1]")
      ->capture_default_str();
  o->add_option("--seed", oo.seed, "Resampling seed")->capture_default_str();
  o->add_option("--variance-mode", oo.variance_mode, "efron | exact")->capture_default_str();
  o->add_option("--out", oo.out, "Output root (<out>/reports)")->capture_default_str();

  GridOptions gr;
  auto* g = app.add_subcommand("moments-grid", "Moment-deviation errors over a log-spaced grid");
  g->add_option("--mu-lo", gr.mu_lo, "Smallest target mean")->capture_default_str();
  g->add_option("--mu-hi", gr.mu_hi, "Largest target mean")->capture_default_str();
  g->add_option("--var-lo", gr.var_lo, "Smallest target variance")->capture_default_str();
  g->add_option("--var-hi", gr.var_hi, "Largest target variance")->capture_default_str();
  g->add_option("--n-mu", gr.n_mu, "Mean grid points")->capture_default_str();
  g->add_option("--n-var", gr.n_var, "Variance grid points")->capture_default_str();
  g->add_option("--terms", gr.terms, "Partial-sum length")->capture_default_str();
  g->add_option("--out", gr.out, "Output root (<out>/reports)")->capture_default_str();

  DemoOptions de;
  auto* d = app.add_subcommand(
      "attenuation-demo", "Trace the predicted mean and gamma at probe inputs over training");
  d->add_option("--train", de.train_path, "Training CSV (default: generate the beta-study set)");
  d->add_option("--val", de.val_path, "Validation CSV");
  d->add_option("--n", de.n, "Generated training rows")->capture_default_str();
  d->add_option("--n-val", de.n_val, "Generated validation rows")->capture_default_str();
  d->add_option("--isolated-repeats", de.isolated_repeats, "Copies of each isolated point")
      ->capture_default_str();
  d->add_option("--beta", de.beta, "Beta in [0, 1]")->capture_default_str();
  d->add_option("--gamma-init", de.gamma_init, "Initial log gamma bias")->capture_default_str();
  d->add_option("--epochs", de.epochs, "Training epochs")->capture_default_str();
  d->add_option("--batch-size", de.batch_size, "Minibatch size")->capture_default_str();
  d->add_option("--lr", de.lr, "Initial learning rate")->capture_default_str();
  d->add_option("--weight-decay", de.weight_decay, "Decoupled weight decay")->capture_default_str();
  d->add_option("--hidden", de.hidden, "Comma-separated hidden widths")->capture_default_str();
  d->add_option("--probes", de.probes, "Comma-separated probe inputs")->capture_default_str();
  d->add_option("--seed", de.seed, "Data, init and shuffling seed")->capture_default_str();
  d->add_option("--out", de.out, "Output root (<out>/reports)")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (t->parsed()) return cmd_train(tr);
    if (e->parsed()) return cmd_eval(ev);
    if (en->parsed()) return cmd_ensemble_eval(ee);
    if (o->parsed()) return cmd_ood(oo);
    if (g->parsed()) return cmd_moments_grid(gr);
    if (d->parsed()) return cmd_attenuation_demo(de);
  } catch (const NumericDivergence& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitDivergence;
  } catch (const NumericOverflow& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitDivergence;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitIo;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ddpn
