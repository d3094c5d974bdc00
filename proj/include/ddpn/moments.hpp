#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ddpn {

// Building blocks of the Double Poisson moment-deviation functions, all in
// log space so that large gamma * mu stays representable.
namespace mdf {

// log h(z), h(z) = e^{-z} z^z / z!
double log_h(std::int64_t z);
// r(mu, gamma, z) = gamma (z - mu + z log mu - z log z)
double r(double mu, double gamma, std::int64_t z);
// log s(mu, gamma, z), s = h(z) exp(r(mu, gamma, z))
double log_s(double mu, double gamma, std::int64_t z);
// d(mu, gamma) over the first n_terms support points.
double d(double mu, double gamma, int n_terms);

}  // namespace mdf

struct MomentDeviation {
  double eps1 = 0.0;  // |E[Z] - mu0|
  double eps2 = 0.0;  // |Var[Z] - var0|
};

inline constexpr int kDefaultMdfTerms = 100;

// Deviation of the true Double Poisson mean and variance from the targets
// (mu0, var0) when gamma0 = mu0 / var0, using partial sums over z = 0..n_terms-1.
MomentDeviation mdf_epsilon(double mu0, double var0, int n_terms = kDefaultMdfTerms);

struct MomentGrid {
  std::vector<double> mu_targets;
  std::vector<double> var_targets;
  // Row-major: entry (i, j) at i * var_targets.size() + j pairs mu_targets[i] with var_targets[j].
  std::vector<double> eps1;
  std::vector<double> eps2;
  int n_terms = kDefaultMdfTerms;

  double eps1_at(std::size_t i, std::size_t j) const { return eps1[i * var_targets.size() + j]; }
  double eps2_at(std::size_t i, std::size_t j) const { return eps2[i * var_targets.size() + j]; }
};

MomentGrid moments_grid(const std::vector<double>& mu_targets,
                        const std::vector<double>& var_targets, int n_terms = kDefaultMdfTerms);

// `n` log-spaced points from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

// CSV with header mu0,var0,eps1,eps2; rows follow the grid's row-major order.
void write_moment_grid_csv(std::ostream& os, const MomentGrid& grid);

}  // namespace ddpn
