#include <cmath>
#include <numeric>

#include "doctest.h"

#include "ddpn/distributions.hpp"
#include "ddpn/errors.hpp"

using namespace ddpn;

namespace {

// Reference values computed offline with 40-digit arithmetic over 10000 terms.
constexpr double kNormalizerMuHalfGammaTenth = 0.6774009262935454063;
constexpr double kDp52PmfAt5 = 0.25048677317614710514;
constexpr double kDp3HalfCdfAt3 = 0.63503328018525610269;
constexpr double kDp42Mean = 4.0075759823625168978;
constexpr double kDp42Var = 1.9937245243815343007;

// Independent long-double partial sum of the unnormalized terms.
long double brute_normalizer(double mu, double gamma, int n) {
  long double acc = 0.0L;
  for (int y = 0; y < n; ++y) {
    const long double yl = y;
    const long double ylogy = y == 0 ? 0.0L : yl * std::log(yl);
    const long double log_h = -yl + ylogy - std::lgamma(yl + 1.0L);
    acc += std::exp(0.5L * std::log(static_cast<long double>(gamma)) + log_h +
                    gamma * (yl - mu + yl * std::log(static_cast<long double>(mu)) - ylogy));
  }
  return acc;
}

}  // namespace

TEST_CASE("normalizer equals one when gamma is one") {
  // The default stopping rule drops a tail of order the tail tolerance.
  CHECK(std::abs(dp_normalizer({2.0, 1.0}) - 1.0) <= 1e-10);
  CHECK(std::abs(dp_normalizer({37.5, 1.0}) - 1.0) <= 1e-10);
  const SupportTruncation tight{1e-16, 10000};
  CHECK(std::abs(dp_normalizer({2.0, 1.0}, tight) - 1.0) <= 1e-14);
  CHECK(std::abs(dp_normalizer({37.5, 1.0}, tight) - 1.0) <= 1e-14);
}

TEST_CASE("normalizer is close to one for moderate parameters") {
  CHECK(std::abs(dp_normalizer({5.0, 2.0}) - 1.0) < 0.01);
}

TEST_CASE("normalizer matches a long partial sum in the over-dispersed regime") {
  const double c = dp_normalizer({0.5, 0.1});
  CHECK(c == doctest::Approx(kNormalizerMuHalfGammaTenth).epsilon(1e-9));
  CHECK(c == doctest::Approx(static_cast<double>(brute_normalizer(0.5, 0.1, 10000))).epsilon(1e-9));
}

TEST_CASE("normalizer overflow is reported") {
  CHECK_THROWS_AS(dp_normalizer({1e300, 1e300}), NumericOverflow);
}

TEST_CASE("pmf values") {
  SUBCASE("unnormalized gamma = 1 term is the Poisson mass") {
    const auto d = PredictiveDistribution::double_poisson(2.0, 1.0);
    CHECK(dist_pmf(d, 0, false) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  }
  SUBCASE("geometric special case") {
    CHECK(dist_pmf(PredictiveDistribution::neg_binomial(1.0, 0.5), 0) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("normalized Double Poisson mass") {
    const auto d = PredictiveDistribution::double_poisson(5.0, 2.0);
    CHECK(dist_pmf(d, 5) == doctest::Approx(kDp52PmfAt5).epsilon(1e-10));
  }
  SUBCASE("negative or fractional counts are rejected") {
    const auto d = PredictiveDistribution::poisson(2.0);
    CHECK_THROWS_AS(dist_pmf(d, -1), DomainError);
    CHECK_THROWS_AS(dist_pmf(d, 1.5), DomainError);
  }
  SUBCASE("mixture averages components") {
    const auto a = PredictiveDistribution::poisson(2.0);
    const auto b = PredictiveDistribution::poisson(7.0);
    const auto m = PredictiveDistribution::mixture({a, b});
    for (int y = 0; y < 15; ++y) {
      CHECK(dist_pmf(m, y) == doctest::Approx(0.5 * (dist_pmf(a, y) + dist_pmf(b, y))));
    }
  }
}

TEST_CASE("constructors enforce parameter domains") {
  CHECK_THROWS_AS(PredictiveDistribution::double_poisson(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::double_poisson(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::poisson(0.0), DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::neg_binomial(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::gaussian(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::mixture({}), DomainError);
  const auto p = PredictiveDistribution::poisson(1.0);
  CHECK_THROWS_AS(PredictiveDistribution::mixture({PredictiveDistribution::mixture({p})}),
                  DomainError);
  CHECK_THROWS_AS(PredictiveDistribution::mixture({p, PredictiveDistribution::gaussian(0, 1)}),
                  DomainError);
}

TEST_CASE("cdf") {
  CHECK(dist_cdf(PredictiveDistribution::poisson(2.0), 1e9) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(dist_cdf(PredictiveDistribution::double_poisson(3.0, 0.5), -0.5) == 0.0);
  CHECK(dist_cdf(PredictiveDistribution::double_poisson(3.0, 0.5), 3) ==
        doctest::Approx(kDp3HalfCdfAt3).epsilon(1e-10));
  CHECK(dist_cdf(PredictiveDistribution::gaussian(1.0, 4.0), 1.0) == doctest::Approx(0.5));

  SUBCASE("nondecreasing and right-continuous on the integer grid") {
    const auto d = PredictiveDistribution::double_poisson(6.5, 0.3);
    double prev = 0.0;
    for (int y = 0; y < 80; ++y) {
      const double f = dist_cdf(d, y);
      CHECK(f >= prev);
      CHECK(dist_cdf(d, y + 0.999) == f);
      prev = f;
    }
  }
}

TEST_CASE("normalized mass sums to one over the truncated support") {
  for (double mu : {0.05, 0.5, 1.0, 4.0, 17.0, 60.0}) {
    for (double gamma : {0.05, 0.3, 1.0, 3.0, 12.0}) {
      const double total = pmf_table(PredictiveDistribution::double_poisson(mu, gamma)).total();
      CHECK(total <= 1.0 + 1e-12);
      CHECK(total >= 1.0 - 1e-8);
    }
  }
}

TEST_CASE("gamma = 1 reduces to Poisson pointwise") {
  for (double mu : {0.3, 2.0, 9.7, 25.0}) {
    const auto dp = PredictiveDistribution::double_poisson(mu, 1.0);
    const auto po = PredictiveDistribution::poisson(mu);
    for (int y = 0; y < 60; ++y) CHECK(std::abs(dist_pmf(dp, y) - dist_pmf(po, y)) < 1e-10);
  }
}

TEST_CASE("moments") {
  const auto dp = PredictiveDistribution::double_poisson(4.0, 2.0);
  const auto efron = dist_moments(dp, MomentMode::EfronApprox);
  CHECK(efron.mean == 4.0);
  CHECK(efron.variance == 2.0);

  const auto exact = dist_moments(dp, MomentMode::ExactSeries);
  CHECK(exact.mean == doctest::Approx(kDp42Mean).epsilon(1e-10));
  CHECK(exact.variance == doctest::Approx(kDp42Var).epsilon(1e-10));

  const auto nb = dist_moments(PredictiveDistribution::neg_binomial(1.0, 0.5), MomentMode::EfronApprox);
  CHECK(nb.mean == doctest::Approx(1.0));
  CHECK(nb.variance == doctest::Approx(2.0));

  const auto po = dist_moments(PredictiveDistribution::poisson(3.3), MomentMode::ExactSeries);
  CHECK(po.mean == po.variance);

  SUBCASE("negative binomial is over-dispersed on a grid") {
    for (double r : {0.1, 1.0, 7.0}) {
      for (double p : {0.05, 0.5, 0.95}) {
        const auto m = dist_moments(PredictiveDistribution::neg_binomial(r, p), MomentMode::EfronApprox);
        CHECK(m.variance > m.mean);
      }
    }
  }
  SUBCASE("gamma sets the direction of dispersion") {
    for (double mu : {1.0, 3.0, 10.0, 40.0}) {
      for (double g : {0.2, 0.6}) {
        const auto m = dist_moments(PredictiveDistribution::double_poisson(mu, g), MomentMode::ExactSeries);
        CHECK(m.variance > m.mean);
      }
      for (double g : {1.5, 5.0}) {
        const auto m = dist_moments(PredictiveDistribution::double_poisson(mu, g), MomentMode::ExactSeries);
        CHECK(m.variance < m.mean);
      }
    }
  }
}

TEST_CASE("mode") {
  CHECK(dist_mode(PredictiveDistribution::poisson(2.5)) == 2.0);
  // 1 and 2 tie exactly for lambda = 2; the smaller value wins.
  CHECK(dist_mode(PredictiveDistribution::poisson(2.0)) == 1.0);
  CHECK(dist_mode(PredictiveDistribution::gaussian(1.7, 3.0)) == 1.7);

  SUBCASE("exhaustive scan") {
    const auto d = PredictiveDistribution::double_poisson(3.2, 4.0);
    int best = 0;
    for (int y = 1; y < 100; ++y) {
      if (dist_pmf(d, y) > dist_pmf(d, best)) best = y;
    }
    CHECK(best == 3);
    CHECK(dist_mode(d) == best);
  }
  SUBCASE("mixture mode uses the averaged mass") {
    const auto m = PredictiveDistribution::mixture(
        {PredictiveDistribution::double_poisson(2.0, 20.0), PredictiveDistribution::double_poisson(9.0, 20.0),
         PredictiveDistribution::double_poisson(9.0, 20.0)});
    CHECK(dist_mode(m) == 9.0);
  }
}

TEST_CASE("quantiles") {
  const auto d = PredictiveDistribution::poisson(4.0);
  const double q = dist_quantile(d, 0.5);
  CHECK(dist_cdf(d, q) >= 0.5);
  CHECK(dist_cdf(d, q - 1) < 0.5);
  CHECK(dist_quantile(PredictiveDistribution::gaussian(2.0, 1.0), 0.975) ==
        doctest::Approx(2.0 + 1.959963984540054).epsilon(1e-8));
}

TEST_CASE("sampling") {
  SUBCASE("sample mean agrees with the series mean") {
    const auto d = PredictiveDistribution::double_poisson(5.0, 2.0);
    Rng rng(11);
    const auto xs = dist_sample(d, rng, 100000);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const auto m = dist_moments(d, MomentMode::ExactSeries);
    const double se = std::sqrt(m.variance / xs.size());
    CHECK(std::abs(mean - m.mean) < 3.0 * se);
  }
  SUBCASE("very large gamma is nearly a point mass") {
    const auto d = PredictiveDistribution::double_poisson(7.0, 1000.0);
    Rng rng(3);
    const auto xs = dist_sample(d, rng, 10000);
    const auto hits = std::count(xs.begin(), xs.end(), 7.0);
    CHECK(hits >= 9900);
  }
  SUBCASE("deterministic per seed") {
    const auto d = PredictiveDistribution::neg_binomial(2.5, 0.3);
    Rng a(42), b(42);
    CHECK(dist_sample(d, a, 500) == dist_sample(d, b, 500));
  }
}
