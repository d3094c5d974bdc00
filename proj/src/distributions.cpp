#include "ddpn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "ddpn/ensemble.hpp"
#include "ddpn/errors.hpp"

namespace ddpn {

namespace {

constexpr int kLogFactorialTableSize = 10001;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialTableSize);
    for (int k = 0; k < kLogFactorialTableSize; ++k) {
      t[k] = boost::math::lgamma(static_cast<double>(k) + 1.0);
    }
    return t;
  }();
  return table;
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be a positive finite real, got " +
                      std::to_string(v));
  }
}

// Walks y = 0, 1, ... accumulating log terms until the sequence has passed
// its largest term and the current term is below tol times the running sum.
template <typename LogTerm>
std::vector<double> truncated_log_terms(LogTerm&& log_term, const SupportTruncation& trunc,
                                        double& log_total) {
  if (!(trunc.tail_mass_tol > 0.0 && trunc.tail_mass_tol < 1.0) || trunc.hard_cap < 1) {
    throw DomainError("invalid support truncation");
  }
  const double log_tol = std::log(trunc.tail_mass_tol);
  std::vector<double> terms;
  log_total = -std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  std::int64_t argmax = 0;
  for (std::int64_t y = 0; y <= trunc.hard_cap; ++y) {
    const double lt = log_term(y);
    if (std::isnan(lt) || lt == std::numeric_limits<double>::infinity()) {
      throw NumericOverflow("non-finite log term at y=" + std::to_string(y));
    }
    terms.push_back(lt);
    log_total = log_sum_exp(log_total, lt);
    if (lt > best) {
      best = lt;
      argmax = y;
    }
    if (y > argmax && lt - log_total < log_tol) break;
  }
  if (!std::isfinite(log_total)) throw NumericOverflow("series sum is not finite");
  return terms;
}

double poisson_log_pmf(double lambda, std::int64_t y) {
  return static_cast<double>(y) * std::log(lambda) - lambda - log_factorial(y);
}

double nb_log_pmf(const NegBinomialParams& p, std::int64_t y) {
  const double yd = static_cast<double>(y);
  return boost::math::lgamma(yd + p.r) - boost::math::lgamma(p.r) - log_factorial(y) +
         p.r * std::log(p.p) + yd * std::log1p(-p.p);
}

std::int64_t as_count(double y) {
  if (y < 0.0 || std::floor(y) != y) {
    throw DomainError("count distributions are supported on nonnegative integers, got " +
                      std::to_string(y));
  }
  return static_cast<std::int64_t>(y);
}

PmfTable table_from_log_terms(const std::vector<double>& log_terms, double log_norm) {
  PmfTable t;
  t.probs.reserve(log_terms.size());
  for (double lt : log_terms) t.probs.push_back(std::exp(lt - log_norm));
  return t;
}

double gaussian_mixture_density(const std::vector<PredictiveDistribution>& comps, double x) {
  double acc = 0.0;
  for (const auto& c : comps) {
    const auto& g = std::get<GaussianParams>(c.params());
    const double s = std::sqrt(g.sigma2);
    acc += normal_pdf((x - g.mu) / s) / s;
  }
  return acc / static_cast<double>(comps.size());
}

double gaussian_mixture_mode(const std::vector<PredictiveDistribution>& comps) {
  // Mean-shift from every component mean; each run climbs to a local mode.
  double best_x = 0.0;
  double best_d = -1.0;
  for (const auto& start : comps) {
    double x = std::get<GaussianParams>(start.params()).mu;
    for (int it = 0; it < 500; ++it) {
      double num = 0.0, den = 0.0;
      for (const auto& c : comps) {
        const auto& g = std::get<GaussianParams>(c.params());
        const double s = std::sqrt(g.sigma2);
        const double w = normal_pdf((x - g.mu) / s) / (s * g.sigma2);
        num += w * g.mu;
        den += w;
      }
      if (!(den > 0.0)) break;
      const double next = num / den;
      if (std::abs(next - x) < 1e-13 * (1.0 + std::abs(x))) {
        x = next;
        break;
      }
      x = next;
    }
    const double d = gaussian_mixture_density(comps, x);
    if (d > best_d * (1.0 + 1e-12) || (std::abs(d - best_d) <= 1e-12 * best_d && x < best_x)) {
      best_d = d;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

// ---------------------------------------------------------------------------
// PredictiveDistribution

PredictiveDistribution PredictiveDistribution::double_poisson(double mu, double gamma) {
  require_positive(mu, "Double Poisson mu");
  require_positive(gamma, "Double Poisson gamma");
  return PredictiveDistribution(DoublePoissonParams{mu, gamma});
}

PredictiveDistribution PredictiveDistribution::poisson(double lambda) {
  require_positive(lambda, "Poisson lambda");
  return PredictiveDistribution(PoissonParams{lambda});
}

PredictiveDistribution PredictiveDistribution::neg_binomial(double r, double p) {
  require_positive(r, "negative binomial r");
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("negative binomial p must lie in (0, 1), got " + std::to_string(p));
  }
  return PredictiveDistribution(NegBinomialParams{r, p});
}

PredictiveDistribution PredictiveDistribution::gaussian(double mu, double sigma2) {
  if (!std::isfinite(mu)) throw DomainError("Gaussian mean must be finite");
  require_positive(sigma2, "Gaussian variance");
  return PredictiveDistribution(GaussianParams{mu, sigma2});
}

PredictiveDistribution PredictiveDistribution::mixture(
    std::vector<PredictiveDistribution> components) {
  if (components.empty()) throw DomainError("a mixture needs at least one component");
  bool any_gaussian = false, any_discrete = false;
  for (const auto& c : components) {
    if (c.kind() == DistKind::Mixture) throw DomainError("mixtures cannot be nested");
    (c.is_discrete() ? any_discrete : any_gaussian) = true;
  }
  if (any_gaussian && any_discrete) {
    throw DomainError("a mixture cannot combine count and Gaussian components");
  }
  return PredictiveDistribution(MixtureParams{std::move(components)});
}

bool PredictiveDistribution::is_discrete() const noexcept {
  switch (kind()) {
    case DistKind::Gaussian:
      return false;
    case DistKind::Mixture:
      return std::get<MixtureParams>(params_).components.front().is_discrete();
    default:
      return true;
  }
}

const std::vector<PredictiveDistribution>& PredictiveDistribution::components() const {
  if (kind() != DistKind::Mixture) throw UsageError("components() requires a mixture");
  return std::get<MixtureParams>(params_).components;
}

// ---------------------------------------------------------------------------
// Series helpers

double PmfTable::total() const {
  long double acc = 0.0L;
  for (double p : probs) acc += p;
  return static_cast<double>(acc);
}

double PmfTable::cdf(double y) const {
  if (y < 0.0 || probs.empty()) return 0.0;
  const double fl = std::floor(y);
  const std::size_t last =
      fl >= static_cast<double>(probs.size() - 1) ? probs.size() - 1 : static_cast<std::size_t>(fl);
  long double acc = 0.0L;
  for (std::size_t k = 0; k <= last; ++k) acc += probs[k];
  return std::min(1.0, static_cast<double>(acc));
}

double log_factorial(std::int64_t y) {
  if (y < 0) throw DomainError("log_factorial of a negative integer");
  if (y < kLogFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(y)];
  return boost::math::lgamma(static_cast<double>(y) + 1.0);
}

double log_h(std::int64_t y) {
  if (y == 0) return 0.0;
  const double yd = static_cast<double>(y);
  return -yd + yd * std::log(yd) - log_factorial(y);
}

double dp_log_term(const DoublePoissonParams& params, std::int64_t y) {
  const double yd = static_cast<double>(y);
  const double y_log_y = y == 0 ? 0.0 : yd * std::log(yd);
  const double r = params.gamma * (yd - params.mu + yd * std::log(params.mu) - y_log_y);
  return 0.5 * std::log(params.gamma) + log_h(y) + r;
}

double dp_log_normalizer(const DoublePoissonParams& params, const SupportTruncation& trunc) {
  require_positive(params.mu, "Double Poisson mu");
  require_positive(params.gamma, "Double Poisson gamma");
  double log_c = 0.0;
  truncated_log_terms([&](std::int64_t y) { return dp_log_term(params, y); }, trunc, log_c);
  return log_c;
}

double dp_normalizer(const DoublePoissonParams& params, const SupportTruncation& trunc) {
  const double c = std::exp(dp_log_normalizer(params, trunc));
  if (!std::isfinite(c) || c <= 0.0) {
    throw NumericOverflow("Double Poisson normalizer outside double range for mu=" +
                          std::to_string(params.mu) + ", gamma=" + std::to_string(params.gamma));
  }
  return c;
}

PmfTable pmf_table(const PredictiveDistribution& dist, const SupportTruncation& trunc) {
  double log_total = 0.0;
  switch (dist.kind()) {
    case DistKind::DoublePoisson: {
      const auto& p = std::get<DoublePoissonParams>(dist.params());
      const auto terms =
          truncated_log_terms([&](std::int64_t y) { return dp_log_term(p, y); }, trunc, log_total);
      return table_from_log_terms(terms, log_total);
    }
    case DistKind::Poisson: {
      const double lambda = std::get<PoissonParams>(dist.params()).lambda;
      const auto terms = truncated_log_terms(
          [&](std::int64_t y) { return poisson_log_pmf(lambda, y); }, trunc, log_total);
      return table_from_log_terms(terms, 0.0);
    }
    case DistKind::NegBinomial: {
      const auto& p = std::get<NegBinomialParams>(dist.params());
      const auto terms =
          truncated_log_terms([&](std::int64_t y) { return nb_log_pmf(p, y); }, trunc, log_total);
      return table_from_log_terms(terms, 0.0);
    }
    case DistKind::Gaussian:
      throw UsageError("Gaussian distributions have no probability mass table");
    case DistKind::Mixture: {
      const auto& comps = dist.components();
      if (!dist.is_discrete()) {
        throw UsageError("Gaussian mixtures have no probability mass table");
      }
      PmfTable out;
      for (const auto& c : comps) {
        const auto t = pmf_table(c, trunc);
        if (t.probs.size() > out.probs.size()) out.probs.resize(t.probs.size(), 0.0);
        for (std::size_t k = 0; k < t.probs.size(); ++k) out.probs[k] += t.probs[k];
      }
      const double m = static_cast<double>(comps.size());
      for (double& v : out.probs) v /= m;
      return out;
    }
  }
  throw UsageError("unknown distribution kind");
}

// ---------------------------------------------------------------------------
// Evaluation

double dist_pmf(const PredictiveDistribution& dist, double y, bool normalized,
                const SupportTruncation& trunc) {
  switch (dist.kind()) {
    case DistKind::DoublePoisson: {
      const auto& p = std::get<DoublePoissonParams>(dist.params());
      const double lt = dp_log_term(p, as_count(y));
      return normalized ? std::exp(lt - dp_log_normalizer(p, trunc)) : std::exp(lt);
    }
    case DistKind::Poisson:
      return std::exp(poisson_log_pmf(std::get<PoissonParams>(dist.params()).lambda, as_count(y)));
    case DistKind::NegBinomial:
      return std::exp(nb_log_pmf(std::get<NegBinomialParams>(dist.params()), as_count(y)));
    case DistKind::Gaussian: {
      const auto& g = std::get<GaussianParams>(dist.params());
      const double s = std::sqrt(g.sigma2);
      return normal_pdf((y - g.mu) / s) / s;
    }
    case DistKind::Mixture: {
      const auto& comps = dist.components();
      double acc = 0.0;
      for (const auto& c : comps) acc += dist_pmf(c, y, normalized, trunc);
      return acc / static_cast<double>(comps.size());
    }
  }
  throw UsageError("unknown distribution kind");
}

double dist_cdf(const PredictiveDistribution& dist, double y, const SupportTruncation& trunc) {
  if (dist.kind() == DistKind::Gaussian) {
    const auto& g = std::get<GaussianParams>(dist.params());
    return normal_cdf((y - g.mu) / std::sqrt(g.sigma2));
  }
  if (dist.kind() == DistKind::Mixture && !dist.is_discrete()) {
    double acc = 0.0;
    for (const auto& c : dist.components()) acc += dist_cdf(c, y, trunc);
    return std::clamp(acc / static_cast<double>(dist.components().size()), 0.0, 1.0);
  }
  if (y < 0.0) return 0.0;
  return pmf_table(dist, trunc).cdf(y);
}

Moments dist_moments(const PredictiveDistribution& dist, MomentMode mode,
                     const SupportTruncation& trunc) {
  switch (dist.kind()) {
    case DistKind::DoublePoisson: {
      const auto& p = std::get<DoublePoissonParams>(dist.params());
      if (mode == MomentMode::EfronApprox) return {p.mu, p.mu / p.gamma};
      const auto t = pmf_table(dist, trunc);
      long double mass = 0.0L, first = 0.0L;
      for (std::size_t k = 0; k < t.probs.size(); ++k) {
        mass += t.probs[k];
        first += static_cast<long double>(k) * t.probs[k];
      }
      const long double mean = first / mass;
      long double second = 0.0L;
      for (std::size_t k = 0; k < t.probs.size(); ++k) {
        const long double d = static_cast<long double>(k) - mean;
        second += d * d * t.probs[k];
      }
      return {static_cast<double>(mean), static_cast<double>(second / mass)};
    }
    case DistKind::Poisson: {
      const double l = std::get<PoissonParams>(dist.params()).lambda;
      return {l, l};
    }
    case DistKind::NegBinomial: {
      const auto& p = std::get<NegBinomialParams>(dist.params());
      const double mean = p.r * (1.0 - p.p) / p.p;
      return {mean, mean / p.p};
    }
    case DistKind::Gaussian: {
      const auto& g = std::get<GaussianParams>(dist.params());
      return {g.mu, g.sigma2};
    }
    case DistKind::Mixture: {
      std::vector<double> means, vars;
      for (const auto& c : dist.components()) {
        const auto m = dist_moments(c, mode, trunc);
        means.push_back(m.mean);
        vars.push_back(m.variance);
      }
      return mixture_moments(means, vars);
    }
  }
  throw UsageError("unknown distribution kind");
}

double dist_mode(const PredictiveDistribution& dist, const SupportTruncation& trunc) {
  if (dist.kind() == DistKind::Gaussian) return std::get<GaussianParams>(dist.params()).mu;
  if (dist.kind() == DistKind::Mixture && !dist.is_discrete()) {
    return gaussian_mixture_mode(dist.components());
  }
  const auto t = pmf_table(dist, trunc);
  const double peak = *std::max_element(t.probs.begin(), t.probs.end());
  // Values within rounding of the peak count as ties; the smallest one wins.
  for (std::size_t k = 0; k < t.probs.size(); ++k) {
    if (t.probs[k] >= peak * (1.0 - 1e-12)) return static_cast<double>(k);
  }
  return 0.0;
}

double dist_quantile(const PredictiveDistribution& dist, double q, const SupportTruncation& trunc) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  if (dist.is_discrete()) {
    const auto t = pmf_table(dist, trunc);
    long double acc = 0.0L;
    for (std::size_t k = 0; k < t.probs.size(); ++k) {
      acc += t.probs[k];
      if (acc >= q) return static_cast<double>(k);
    }
    return static_cast<double>(t.probs.size() - 1);
  }
  std::vector<PredictiveDistribution> comps =
      dist.kind() == DistKind::Mixture ? dist.components()
                                       : std::vector<PredictiveDistribution>{dist};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) {
    const auto& g = std::get<GaussianParams>(c.params());
    const double s = std::sqrt(g.sigma2);
    lo = std::min(lo, g.mu - 40.0 * s);
    hi = std::max(hi, g.mu + 40.0 * s);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dist_cdf(dist, mid, trunc) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::int64_t sample_from_table(const PmfTable& table, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * table.total();
  long double acc = 0.0L;
  for (std::size_t k = 0; k < table.probs.size(); ++k) {
    acc += table.probs[k];
    if (u < acc) return static_cast<std::int64_t>(k);
  }
  return static_cast<std::int64_t>(table.probs.size() - 1);
}

std::vector<double> dist_sample(const PredictiveDistribution& dist, Rng& rng, std::size_t n,
                                const SupportTruncation& trunc) {
  if (n == 0) throw DomainError("sample count must be at least 1");
  std::vector<double> out;
  out.reserve(n);
  if (dist.is_discrete()) {
    const auto t = pmf_table(dist, trunc);
    std::vector<long double> cum(t.probs.size());
    long double acc = 0.0L;
    for (std::size_t k = 0; k < t.probs.size(); ++k) cum[k] = acc += t.probs[k];
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const long double u = unif(rng) * acc;
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      if (it == cum.end()) --it;
      out.push_back(static_cast<double>(it - cum.begin()));
    }
    return out;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  if (dist.kind() == DistKind::Gaussian) {
    const auto& g = std::get<GaussianParams>(dist.params());
    for (std::size_t i = 0; i < n; ++i) out.push_back(g.mu + std::sqrt(g.sigma2) * normal(rng));
    return out;
  }
  const auto& comps = dist.components();
  std::uniform_int_distribution<std::size_t> pick(0, comps.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = std::get<GaussianParams>(comps[pick(rng)].params());
    out.push_back(g.mu + std::sqrt(g.sigma2) * normal(rng));
  }
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

}  // namespace ddpn
