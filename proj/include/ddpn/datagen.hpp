#pragma once

#include <cstdint>

#include "ddpn/dataset.hpp"

namespace ddpn {

struct SplitDatasets {
  Dataset train;
  Dataset val;
  Dataset test;
};

// x ~ U(0, 2 pi); y0 drawn from the normalized fifth power of a Poisson(10 sin x + 10)
// PMF on {0, ..., 60}; y = 30 - y0. Draws with y0 > 30 are redrawn.
SplitDatasets gen_sine_conflation(std::size_t n_train = 800, std::size_t n_val = 100,
                                  std::size_t n_test = 100, std::uint64_t seed = 0);

// Covariate interval used by both misspecification processes.
inline constexpr double kMisspecXMin = 0.5;
inline constexpr double kMisspecXMax = 5.0;

// y ~ Poisson(exp(x / 2)).
Dataset gen_misspec_poisson(std::size_t n, std::uint64_t seed = 0);

// y ~ NegBinom(r = x^2, p = 1/2) through a gamma-Poisson draw.
Dataset gen_misspec_nb(std::size_t n, std::uint64_t seed = 0);

// x ~ U[3, 8], y ~ DP(ceil(x sin x + 15), 6 - 0.03 x^2), followed by
// `isolated_repeats` copies each of the points at x = 1 and x = 10.
Dataset gen_beta_study(std::size_t n, std::uint64_t seed = 0, int isolated_repeats = 1);

// Appends `repeats` copies each of the isolated beta-study points (1, 16) and (10, 10).
void append_isolated_points(Dataset& ds, int repeats);

// Ground truth of the beta-study process.
double beta_study_mean(double x);
double beta_study_gamma(double x);

// Sequential split: the first n_train rows, then n_val, then the rest.
SplitDatasets split_sequential(const Dataset& ds, std::size_t n_train, std::size_t n_val);

// Covariates drawn uniformly on [lo, hi] with labels from the sine-conflation
// process where it is defined (used as a covariate-shift OOD set).
Dataset gen_uniform_inputs(std::size_t n, double lo, double hi, std::uint64_t seed = 0);

}  // namespace ddpn
