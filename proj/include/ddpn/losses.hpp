#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ddpn {

enum class Family { DoublePoisson, Poisson, NegBinomial, Gaussian };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// Number of affine output heads a family needs.
int head_count(Family f);

struct LossSpec {
  Family family = Family::DoublePoisson;
  double beta = 0.0;  // ignored (treated as 0) for Poisson and NegBinomial

  double effective_beta() const;
  void validate() const;
};

// Raw network outputs for one example. `location` is log mu for count
// families and the (identity-link) mean for Gaussian. `log_dispersion` is
// log gamma for Double Poisson, log sigma^2 for Gaussian, log alpha for the
// negative binomial and absent for Poisson.
struct HeadOutput {
  double location = 0.0;
  std::optional<double> log_dispersion;
};

// Value and gradient with respect to the two head outputs.
struct HeadLoss {
  double value = 0.0;
  double d_location = 0.0;
  double d_log_dispersion = 0.0;
};

struct AttenuationParts {
  double d = 0.0;    // dispersion penalty
  double a = 0.0;    // attenuation factor
  double r = 0.0;    // residual penalty
  double phi = 0.0;  // dispersion, 1 / gamma
};

struct BetaLoss {
  double value = 0.0;
  double scale = 1.0;  // gamma^{-beta}; a constant as far as gradients are concerned
};

struct DdpnGrads {
  double d_mu = 0.0;
  double d_gamma = 0.0;
};

// Double Poisson NLL with c = 1 and the parameter-free h(y) term dropped.
double ddpn_nll(double y, double mu_hat, double gamma_hat);
BetaLoss ddpn_beta_nll(double y, double mu_hat, double gamma_hat, double beta);
DdpnGrads ddpn_grads(double y, double mu_hat, double gamma_hat, double beta);

AttenuationParts attenuation_decompose(double y, double mu_hat, double phi_hat);

// Poisson, negative binomial and (beta-)Gaussian losses with gradients with
// respect to the head outputs. Throws UsageError for Double Poisson.
HeadLoss baseline_nll(const LossSpec& spec, double y, const HeadOutput& head);

// Any family: dispatches to the DDPN ops (with the log-link chain rule) or baseline_nll.
HeadLoss head_loss(const LossSpec& spec, double y, const HeadOutput& head);

// NB head parametrization (mean m, dispersion alpha) -> (r, p).
struct NbShape {
  double r = 1.0;
  double p = 0.5;
};
NbShape nb_shape_from_mean_dispersion(double mean, double alpha);

}  // namespace ddpn
