#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace ddpn {

using Rng = std::mt19937_64;

struct DoublePoissonParams {
  double mu = 1.0;     // mean
  double gamma = 1.0;  // inverse dispersion, 1/phi
};

struct PoissonParams {
  double lambda = 1.0;
};

// Number of failures before the r-th success with success probability p.
struct NegBinomialParams {
  double r = 1.0;
  double p = 0.5;
};

struct GaussianParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

// Controls where infinite count series are cut off.
struct SupportTruncation {
  double tail_mass_tol = 1e-10;
  int hard_cap = 10000;
};

enum class DistKind { DoublePoisson, Poisson, NegBinomial, Gaussian, Mixture };

enum class MomentMode { EfronApprox, ExactSeries };

class PredictiveDistribution;

// Uniformly weighted mixture. Components are never mixtures themselves.
struct MixtureParams {
  std::vector<PredictiveDistribution> components;
};

class PredictiveDistribution {
 public:
  using Params = std::variant<DoublePoissonParams, PoissonParams, NegBinomialParams,
                              GaussianParams, MixtureParams>;

  static PredictiveDistribution double_poisson(double mu, double gamma);
  static PredictiveDistribution poisson(double lambda);
  static PredictiveDistribution neg_binomial(double r, double p);
  static PredictiveDistribution gaussian(double mu, double sigma2);
  static PredictiveDistribution mixture(std::vector<PredictiveDistribution> components);

  DistKind kind() const noexcept { return static_cast<DistKind>(params_.index()); }
  bool is_discrete() const noexcept;
  const Params& params() const noexcept { return params_; }

  // Only valid for Mixture.
  const std::vector<PredictiveDistribution>& components() const;

 private:
  explicit PredictiveDistribution(Params p) : params_(std::move(p)) {}
  Params params_;
};

// Normalized probabilities on {0, ..., size()-1}. The table is cut where the
// truncation rule stops, so its sum may fall short of one by the tail mass.
struct PmfTable {
  std::vector<double> probs;
  double total() const;
  double cdf(double y) const;
};

// log of e^{-y} y^y / y! with 0^0 = 1.
double log_h(std::int64_t y);
// log(y!) from a precomputed table inside the default hard cap.
double log_factorial(std::int64_t y);

// Unnormalized Double Poisson log term: 0.5 log(gamma) + log h(y) + gamma (y - mu + y log mu - y log y).
double dp_log_term(const DoublePoissonParams& params, std::int64_t y);

double dp_normalizer(const DoublePoissonParams& params, const SupportTruncation& trunc = {});
double dp_log_normalizer(const DoublePoissonParams& params, const SupportTruncation& trunc = {});

PmfTable pmf_table(const PredictiveDistribution& dist, const SupportTruncation& trunc = {});

double dist_pmf(const PredictiveDistribution& dist, double y, bool normalized = true,
                const SupportTruncation& trunc = {});
double dist_cdf(const PredictiveDistribution& dist, double y, const SupportTruncation& trunc = {});

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments dist_moments(const PredictiveDistribution& dist, MomentMode mode,
                     const SupportTruncation& trunc = {});
double dist_mode(const PredictiveDistribution& dist, const SupportTruncation& trunc = {});

// Smallest support point whose CDF reaches q (bisection on the CDF for Gaussian kinds).
double dist_quantile(const PredictiveDistribution& dist, double q,
                     const SupportTruncation& trunc = {});

std::vector<double> dist_sample(const PredictiveDistribution& dist, Rng& rng, std::size_t n,
                                const SupportTruncation& trunc = {});

// Inverse-CDF draw from a precomputed table.
std::int64_t sample_from_table(const PmfTable& table, Rng& rng);

double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace ddpn
