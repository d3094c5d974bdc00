#include "ddpn/losses.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ddpn/errors.hpp"

namespace ddpn {

namespace {

// y (1 + log mu - log y) with y log y = 0 at y = 0.
double poisson_deviance_term(double y, double mu) {
  if (y == 0.0) return 0.0;
  return y * (1.0 + std::log(mu) - std::log(y));
}

double require_dispersion(const HeadOutput& head, Family f) {
  if (!head.log_dispersion) {
    throw UsageError(std::string(family_name(f)) + " loss needs a dispersion head");
  }
  return *head.log_dispersion;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::DoublePoisson:
      return "double_poisson";
    case Family::Poisson:
      return "poisson";
    case Family::NegBinomial:
      return "neg_binomial";
    case Family::Gaussian:
      return "gaussian";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "double_poisson" || name == "ddpn" || name == "dp") return Family::DoublePoisson;
  if (name == "poisson") return Family::Poisson;
  if (name == "neg_binomial" || name == "nb" || name == "negative_binomial") {
    return Family::NegBinomial;
  }
  if (name == "gaussian" || name == "normal") return Family::Gaussian;
  throw UsageError("unknown family '" + std::string(name) + "'");
}

int head_count(Family f) { return f == Family::Poisson ? 1 : 2; }

double LossSpec::effective_beta() const {
  return (family == Family::Poisson || family == Family::NegBinomial) ? 0.0 : beta;
}

void LossSpec::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("beta must lie in [0, 1], got " + std::to_string(beta));
  }
}

double ddpn_nll(double y, double mu_hat, double gamma_hat) {
  return -0.5 * std::log(gamma_hat) + gamma_hat * mu_hat -
         gamma_hat * poisson_deviance_term(y, mu_hat);
}

BetaLoss ddpn_beta_nll(double y, double mu_hat, double gamma_hat, double beta) {
  const double scale = std::pow(gamma_hat, -beta);
  return {scale * ddpn_nll(y, mu_hat, gamma_hat), scale};
}

DdpnGrads ddpn_grads(double y, double mu_hat, double gamma_hat, double beta) {
  const double scale = std::pow(gamma_hat, -beta);
  DdpnGrads g;
  g.d_mu = scale * gamma_hat * (1.0 - y / mu_hat);
  g.d_gamma = -0.5 * scale / gamma_hat + scale * (mu_hat - poisson_deviance_term(y, mu_hat));
  return g;
}

AttenuationParts attenuation_decompose(double y, double mu_hat, double phi_hat) {
  if (!(phi_hat > 0.0)) throw DomainError("dispersion must be positive");
  AttenuationParts p;
  p.phi = phi_hat;
  p.d = 0.5 * std::log(phi_hat);
  p.a = 1.0 / phi_hat;
  const double y_log_ratio = y == 0.0 ? 0.0 : y * (std::log(mu_hat) - std::log(y));
  p.r = (mu_hat - y) - y_log_ratio;
  return p;
}

NbShape nb_shape_from_mean_dispersion(double mean, double alpha) {
  const double r = 1.0 / alpha;
  return {r, r / (r + mean)};
}

HeadLoss baseline_nll(const LossSpec& spec, double y, const HeadOutput& head) {
  spec.validate();
  switch (spec.family) {
    case Family::DoublePoisson:
      throw UsageError("use the ddpn_* operations for the Double Poisson family");
    case Family::Poisson: {
      const double lambda = std::exp(head.location);
      return {lambda - y * head.location, lambda - y, 0.0};
    }
    case Family::NegBinomial: {
      // Variance m + alpha m^2, i.e. r = 1/alpha successes with p = r / (r + m).
      const double m = std::exp(head.location);
      const double log_alpha = require_dispersion(head, spec.family);
      const double r = std::exp(-log_alpha);
      const double log_rm = std::log(r + m);
      const double log_pmf = boost::math::lgamma(y + r) - boost::math::lgamma(r) -
                             boost::math::lgamma(y + 1.0) + r * (-log_alpha - log_rm) +
                             y * (head.location - log_rm);
      HeadLoss out;
      out.value = -log_pmf;
      out.d_location = r * (m - y) / (r + m);
      out.d_log_dispersion =
          r * (boost::math::digamma(y + r) - boost::math::digamma(r) + (-log_alpha - log_rm) +
               (m - y) / (r + m));
      return out;
    }
    case Family::Gaussian: {
      const double log_var = require_dispersion(head, spec.family);
      const double var = std::exp(log_var);
      const double resid = y - head.location;
      const double scale = std::exp(spec.beta * log_var);  // (sigma^2)^beta, not differentiated
      HeadLoss out;
      out.value = scale * (0.5 * log_var + resid * resid / (2.0 * var));
      out.d_location = -scale * resid / var;
      out.d_log_dispersion = scale * (0.5 - resid * resid / (2.0 * var));
      return out;
    }
  }
  throw UsageError("unknown family");
}

HeadLoss head_loss(const LossSpec& spec, double y, const HeadOutput& head) {
  if (spec.family != Family::DoublePoisson) return baseline_nll(spec, y, head);
  spec.validate();
  const double log_gamma = require_dispersion(head, spec.family);
  const double mu = std::exp(head.location);
  const double gamma = std::exp(log_gamma);
  const auto loss = ddpn_beta_nll(y, mu, gamma, spec.beta);
  const auto g = ddpn_grads(y, mu, gamma, spec.beta);
  return {loss.value, g.d_mu * mu, g.d_gamma * gamma};
}

}  // namespace ddpn
