#include <cmath>
#include <sstream>

#include "doctest.h"

#include "ddpn/distributions.hpp"
#include "ddpn/errors.hpp"
#include "ddpn/moments.hpp"

using namespace ddpn;

namespace {

// Reference deviations from 40-digit partial sums over z = 0..99.
struct Ref {
  double mu0, var0, eps1, eps2;
};
constexpr Ref kRefs[] = {
    {10.0, 2.0, 0.00138788515821989, 0.000288716672359545},
    {10.0, 1.0, 0.000764442945237839, 7.74680435640459e-5},
    {1.0, 10.0, 1.54196450064512, 1.5667883940664},
    {0.05, 5.0, 7.58176409878366, 114.582849401297},
};

}  // namespace

TEST_CASE("helper functions") {
  CHECK(mdf::log_h(0) == 0.0);
  CHECK(mdf::r(3.0, 2.0, 3) == doctest::Approx(0.0).scale(1.0));
  CHECK(mdf::r(2.0, 1.0, 0) == -2.0);
  CHECK(std::exp(mdf::log_s(4.0, 0.5, 6)) >= 0.0);
  // Gamma = 1 makes the Efron variance exact, so d reduces to zero.
  CHECK(std::abs(mdf::d(5.0, 1.0, 100)) < 1e-12);
}

TEST_CASE("gamma = 1 gives zero deviation") {
  const auto e = mdf_epsilon(5.0, 5.0, 100);
  CHECK(e.eps1 < 1e-9);
  CHECK(e.eps2 < 1e-9);
  for (double mu : {0.01, 0.2, 1.0, 7.0, 20.0, 35.0}) {
    const auto d = mdf_epsilon(mu, mu, 100);
    CHECK(d.eps1 <= 1e-9);
    CHECK(d.eps2 <= 1e-9);
  }
}

TEST_CASE("reference deviations") {
  for (const auto& r : kRefs) {
    CAPTURE(r.mu0);
    CAPTURE(r.var0);
    const auto e = mdf_epsilon(r.mu0, r.var0, 100);
    CHECK(e.eps1 == doctest::Approx(r.eps1).epsilon(1e-8));
    CHECK(e.eps2 == doctest::Approx(r.eps2).epsilon(1e-8));
  }
}

TEST_CASE("small target means deteriorate") {
  const auto good = mdf_epsilon(10.0, 2.0, 100);
  const auto bad = mdf_epsilon(0.05, 5.0, 100);
  CHECK(good.eps1 < 2e-3);
  CHECK(good.eps2 < 1e-3);
  CHECK(bad.eps1 > 1.0);
  CHECK(bad.eps2 > 1.0);
}

TEST_CASE("agrees with moments of the normalized truncated mass") {
  for (double mu0 : {1.0, 2.5, 6.0, 13.0, 20.0}) {
    for (double ratio : {0.3, 0.7, 1.6, 3.0}) {
      const double var0 = mu0 * ratio;
      const auto e = mdf_epsilon(mu0, var0, 400);
      const auto m = dist_moments(PredictiveDistribution::double_poisson(mu0, mu0 / var0),
                                  MomentMode::ExactSeries);
      CHECK(std::abs(e.eps1 - std::abs(m.mean - mu0)) < 1e-6);
      CHECK(std::abs(e.eps2 - std::abs(m.variance - var0)) < 1e-6);
    }
  }
}

TEST_CASE("converged series are insensitive to the number of terms") {
  for (double mu0 : {1.0, 5.0, 20.0, 40.0}) {
    for (double var0 : {0.5 * mu0, mu0, 2.0 * mu0}) {
      if (mu0 + 10.0 * std::sqrt(var0) >= 100.0) continue;
      const auto a = mdf_epsilon(mu0, var0, 100);
      const auto b = mdf_epsilon(mu0, var0, 1000);
      CHECK(std::abs(a.eps1 - b.eps1) < 1e-9);
      CHECK(std::abs(a.eps2 - b.eps2) < 1e-9);
    }
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(mdf_epsilon(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(mdf_epsilon(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(mdf_epsilon(1.0, 1.0, 0), DomainError);
  CHECK_THROWS_AS(moments_grid({}, {1.0}), DomainError);
}

TEST_CASE("grids") {
  SUBCASE("single cell") {
    const auto g = moments_grid({5.0}, {5.0});
    REQUIRE(g.eps1.size() == 1);
    CHECK(g.eps1[0] < 1e-9);
    CHECK(g.eps2[0] < 1e-9);
  }
  SUBCASE("two by two") {
    const auto g = moments_grid({1.0, 10.0}, {1.0, 10.0});
    CHECK(g.eps1_at(0, 0) < 1e-3);
    CHECK(g.eps2_at(1, 1) < 1e-3);
    // Row-major layout: (mu = 10, var = 1) sits at index 2.
    CHECK(g.eps1[2] == g.eps1_at(1, 0));
    CHECK(g.eps1_at(1, 0) == mdf_epsilon(10.0, 1.0).eps1);
  }
  SUBCASE("the smallest mean dominates") {
    const std::vector<double> mus{0.01, 0.1, 1.0, 10.0};
    const std::vector<double> vars{0.1, 1.0, 10.0};
    const auto g = moments_grid(mus, vars);
    double max_small = 0.0, max_rest = 0.0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      max_small = std::max(max_small, g.eps2_at(0, j));
      for (std::size_t i = 1; i < mus.size(); ++i) max_rest = std::max(max_rest, g.eps2_at(i, j));
    }
    CHECK(max_small > max_rest);
  }
  SUBCASE("csv layout") {
    const auto g = moments_grid({1.0, 2.0}, {3.0});
    std::ostringstream os;
    write_moment_grid_csv(os, g);
    const std::string text = os.str();
    CHECK(text.rfind("mu0,var0,eps1,eps2\n1,3,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }
}

TEST_CASE("logspace endpoints are exact") {
  const auto v = logspace(0.01, 100.0, 41);
  CHECK(v.front() == 0.01);
  CHECK(v.back() == 100.0);
  CHECK(v[20] == doctest::Approx(1.0));
}
