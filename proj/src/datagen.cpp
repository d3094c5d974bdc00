#include "ddpn/datagen.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "ddpn/distributions.hpp"
#include "ddpn/errors.hpp"

namespace ddpn {

namespace {

constexpr int kConflationSupport = 60;
constexpr int kConflationCount = 5;

// Inverse-CDF draw from a normalized Poisson(lambda)^k on {0..support}.
std::int64_t draw_conflation(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) return 0;
  std::vector<double> log_terms(kConflationSupport + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (int y = 0; y <= kConflationSupport; ++y) {
    log_terms[y] = kConflationCount * (y * std::log(lambda) - lambda - log_factorial(y));
    peak = std::max(peak, log_terms[y]);
  }
  PmfTable table;
  double total = 0.0;
  for (double lt : log_terms) total += std::exp(lt - peak);
  for (double lt : log_terms) table.probs.push_back(std::exp(lt - peak) / total);
  return sample_from_table(table, rng);
}

Dataset make(const char* process, std::uint64_t seed) {
  Dataset ds;
  ds.dim = 1;
  ds.process = process;
  ds.seed = seed;
  return ds;
}

void append_sine_rows(Dataset& ds, std::size_t n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> ux(lo, hi);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double lambda = 10.0 * std::sin(x) + 10.0;
    std::int64_t y0 = draw_conflation(lambda, rng);
    while (y0 > 30) y0 = draw_conflation(lambda, rng);
    const double row[1] = {x};
    ds.push_back(row, static_cast<double>(30 - y0));
  }
}

}  // namespace

SplitDatasets gen_sine_conflation(std::size_t n_train, std::size_t n_val, std::size_t n_test,
                                  std::uint64_t seed) {
  if (n_train == 0 || n_val == 0 || n_test == 0) throw DomainError("split sizes must be positive");
  Rng rng(seed);
  SplitDatasets out{make("sine-conflation", seed), make("sine-conflation", seed),
                    make("sine-conflation", seed)};
  const double two_pi = 2.0 * std::numbers::pi;
  append_sine_rows(out.train, n_train, 0.0, two_pi, rng);
  append_sine_rows(out.val, n_val, 0.0, two_pi, rng);
  append_sine_rows(out.test, n_test, 0.0, two_pi, rng);
  return out;
}

Dataset gen_uniform_inputs(std::size_t n, double lo, double hi, std::uint64_t seed) {
  if (n == 0) throw DomainError("n must be positive");
  Rng rng(seed);
  Dataset ds = make("sine-conflation-shifted", seed);
  append_sine_rows(ds, n, lo, hi, rng);
  return ds;
}

Dataset gen_misspec_poisson(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("n must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(kMisspecXMin, kMisspecXMax);
  Dataset ds = make("misspec-poisson", seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const auto dist = PredictiveDistribution::poisson(std::exp(0.5 * x));
    const double row[1] = {x};
    ds.push_back(row, dist_sample(dist, rng, 1).front());
  }
  return ds;
}

Dataset gen_misspec_nb(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("n must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(kMisspecXMin, kMisspecXMax);
  Dataset ds = make("misspec-nb", seed);
  constexpr double p = 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    double x = ux(rng);
    while (x == 0.0) x = ux(rng);
    // Gamma(shape r, scale (1-p)/p) rate mixed into a Poisson gives NB(r, p).
    std::gamma_distribution<double> rate(x * x, (1.0 - p) / p);
    std::poisson_distribution<long long> count(rate(rng));
    const double row[1] = {x};
    ds.push_back(row, static_cast<double>(count(rng)));
  }
  return ds;
}

double beta_study_mean(double x) { return std::ceil(x * std::sin(x) + 15.0); }

double beta_study_gamma(double x) { return 6.0 - 0.03 * x * x; }

Dataset gen_beta_study(std::size_t n, std::uint64_t seed, int isolated_repeats) {
  if (n == 0) throw DomainError("n must be positive");
  if (isolated_repeats < 0) throw DomainError("isolated_repeats must be nonnegative");
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(3.0, 8.0);
  Dataset ds = make("beta-study", seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const auto dist =
        PredictiveDistribution::double_poisson(beta_study_mean(x), beta_study_gamma(x));
    const double row[1] = {x};
    ds.push_back(row, dist_sample(dist, rng, 1).front());
  }
  append_isolated_points(ds, isolated_repeats);
  return ds;
}

void append_isolated_points(Dataset& ds, int repeats) {
  if (ds.dim != 1) throw ShapeError("isolated points are one-dimensional");
  for (const double x : {1.0, 10.0}) {
    for (int k = 0; k < repeats; ++k) {
      const double row[1] = {x};
      ds.push_back(row, beta_study_mean(x));
    }
  }
}

SplitDatasets split_sequential(const Dataset& ds, std::size_t n_train, std::size_t n_val) {
  if (n_train == 0 || n_val == 0 || n_train + n_val >= ds.size()) {
    throw DomainError("split sizes must leave a nonempty train, val and test part");
  }
  SplitDatasets out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->dim = ds.dim;
    part->process = ds.process;
    part->seed = ds.seed;
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Dataset& dst = i < n_train ? out.train : i < n_train + n_val ? out.val : out.test;
    dst.push_back(ds.row(i), ds.labels[i]);
  }
  return out;
}

}  // namespace ddpn
