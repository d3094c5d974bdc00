#include "ddpn/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "ddpn/distributions.hpp"
#include "ddpn/errors.hpp"
#include "ddpn/text.hpp"

namespace ddpn {

namespace mdf {

double log_h(std::int64_t z) { return ddpn::log_h(z); }

double r(double mu, double gamma, std::int64_t z) {
  const double zd = static_cast<double>(z);
  const double z_log_z = z == 0 ? 0.0 : zd * std::log(zd);
  return gamma * (zd - mu + zd * std::log(mu) - z_log_z);
}

double log_s(double mu, double gamma, std::int64_t z) { return log_h(z) + r(mu, gamma, z); }

double d(double mu, double gamma, int n_terms) {
  long double acc = 0.0L;
  for (std::int64_t y = 0; y < n_terms; ++y) {
    const long double s = std::exp(static_cast<long double>(log_s(mu, gamma, y)));
    const long double dev = static_cast<long double>(y) - mu;
    acc += s * (gamma * dev * dev - y) + s * dev;
  }
  return static_cast<double>(acc / std::sqrt(static_cast<long double>(gamma)));
}

}  // namespace mdf

MomentDeviation mdf_epsilon(double mu0, double var0, int n_terms) {
  if (!(mu0 > 0.0) || !(var0 > 0.0)) throw DomainError("target moments must be positive");
  if (n_terms < 1) throw DomainError("n_terms must be at least 1");
  const double gamma0 = mu0 / var0;

  std::vector<double> log_terms(static_cast<std::size_t>(n_terms));
  for (int y = 0; y < n_terms; ++y) log_terms[y] = mdf::log_s(mu0, gamma0, y);
  // Every sum below is homogeneous of the same degree in s in numerator and
  // denominator, so a common scale factor cancels.
  const double shift = *std::max_element(log_terms.begin(), log_terms.end());
  if (!std::isfinite(shift)) throw NumericOverflow("log s is not finite");

  long double s0 = 0.0L, s1 = 0.0L, dsum = 0.0L;
  for (int y = 0; y < n_terms; ++y) {
    const long double s = std::exp(static_cast<long double>(log_terms[y] - shift));
    const long double dev = static_cast<long double>(y) - mu0;
    s0 += s;
    s1 += s * dev;
    dsum += s * (gamma0 * dev * dev - y);
  }
  dsum += s1;
  // dsum is gamma0^{1/2} d(mu0, gamma0) under the common scaling.
  const long double g = gamma0;
  const long double eps1 = s1 / s0;
  const long double eps2 = (dsum * s0 - g * s1 * s1) / (g * s0 * s0);
  MomentDeviation out{static_cast<double>(std::fabs(eps1)), static_cast<double>(std::fabs(eps2))};
  if (!std::isfinite(out.eps1) || !std::isfinite(out.eps2)) {
    throw NumericOverflow("moment deviation not finite for mu0=" + std::to_string(mu0) +
                          ", var0=" + std::to_string(var0));
  }
  return out;
}

MomentGrid moments_grid(const std::vector<double>& mu_targets,
                        const std::vector<double>& var_targets, int n_terms) {
  if (mu_targets.empty() || var_targets.empty()) throw DomainError("empty target list");
  MomentGrid g{mu_targets, var_targets, {}, {}, n_terms};
  g.eps1.reserve(mu_targets.size() * var_targets.size());
  g.eps2.reserve(mu_targets.size() * var_targets.size());
  for (std::size_t i = 0; i < mu_targets.size(); ++i) {
    for (std::size_t j = 0; j < var_targets.size(); ++j) {
      try {
        const auto e = mdf_epsilon(mu_targets[i], var_targets[j], n_terms);
        g.eps1.push_back(e.eps1);
        g.eps2.push_back(e.eps2);
      } catch (const NumericOverflow& err) {
        throw NumericOverflow(std::string(err.what()) + " at grid cell (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
  return g;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > 0.0) || n < 1) throw DomainError("logspace needs positive bounds");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < n; ++k) out[k] = std::pow(10.0, a + (b - a) * k / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void write_moment_grid_csv(std::ostream& os, const MomentGrid& grid) {
  os << "mu0,var0,eps1,eps2\n";
  for (std::size_t i = 0; i < grid.mu_targets.size(); ++i) {
    for (std::size_t j = 0; j < grid.var_targets.size(); ++j) {
      os << format_double(grid.mu_targets[i]) << ',' << format_double(grid.var_targets[j]) << ','
         << format_double(grid.eps1_at(i, j)) << ',' << format_double(grid.eps2_at(i, j)) << '\n';
    }
  }
}

}  // namespace ddpn
