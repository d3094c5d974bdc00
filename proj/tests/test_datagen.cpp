#include <cmath>
#include <numbers>

#include "doctest.h"

#include "ddpn/datagen.hpp"
#include "ddpn/errors.hpp"

using namespace ddpn;

namespace {

double mean_in(const Dataset& ds, double lo, double hi, double* se = nullptr) {
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x = ds.row(i)[0];
    if (x < lo || x > hi) continue;
    s += ds.labels[i];
    s2 += ds.labels[i] * ds.labels[i];
    ++n;
  }
  const double m = s / n;
  if (se) *se = std::sqrt((s2 / n - m * m) / n);
  return m;
}

}  // namespace

TEST_CASE("sine conflation") {
  const auto d = gen_sine_conflation();
  CHECK(d.train.size() == 800);
  CHECK(d.val.size() == 100);
  CHECK(d.test.size() == 100);
  for (const auto* part : {&d.train, &d.val, &d.test}) {
    for (std::size_t i = 0; i < part->size(); ++i) {
      CHECK(part->labels[i] >= 0);
      CHECK(part->labels[i] <= 30);
      CHECK(part->row(i)[0] >= 0.0);
      CHECK(part->row(i)[0] <= 2 * std::numbers::pi);
    }
  }
  const auto again = gen_sine_conflation(800, 100, 100, 0);
  CHECK(dataset_csv_string(again.train) == dataset_csv_string(d.train));
  CHECK_THROWS_AS(gen_sine_conflation(0, 1, 1), DomainError);
}

TEST_CASE("sine conflation labels stay in range over many draws") {
  const auto d = gen_sine_conflation(100000, 1, 1, 5);
  double lo = 1e9, hi = -1e9;
  for (double y : d.train.labels) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  CHECK(lo >= 0);
  CHECK(hi <= 30);
}

TEST_CASE("conflation is under-dispersed where the rate is ten") {
  // x = 0 and x = pi give lambda = 10; sample a thin band around x = pi.
  const auto d = gen_sine_conflation(200000, 1, 1, 9);
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    if (std::abs(d.train.row(i)[0] - std::numbers::pi) > 0.002) continue;
    const double y0 = 30 - d.train.labels[i];
    s += y0;
    s2 += y0 * y0;
    ++n;
  }
  REQUIRE(n > 50);
  const double m = s / n, v = s2 / n - m * m;
  // The exact fifth-power law at lambda = 10 has mean 9.5959 and variance 2.0008.
  CHECK(std::abs(m - 9.59592168568073) < 4.0 * std::sqrt(2.0 / n));
  CHECK(v < 10.0 / 2.0);
}

TEST_CASE("misspecified Poisson process") {
  const auto d = gen_misspec_poisson(20000, 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.row(i)[0] >= kMisspecXMin);
    CHECK(d.row(i)[0] <= kMisspecXMax);
  }
  double se = 0;
  const double m = mean_in(d, 1.95, 2.05, &se);
  // Mean of exp(x/2) over the bin is e up to O(bin^2).
  CHECK(std::abs(m - std::exp(1.0)) < 3.0 * se + 1e-3);
  CHECK(dataset_csv_string(gen_misspec_poisson(50, 3)) == dataset_csv_string(gen_misspec_poisson(50, 3)));
}

TEST_CASE("misspecified negative binomial process") {
  const auto d = gen_misspec_nb(40000, 2);
  double se = 0;
  const double m = mean_in(d, 2.98, 3.02, &se);
  CHECK(std::abs(m - 9.0) < 3.0 * se + 0.15);
  // Variance is twice the mean for p = 1/2.
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.row(i)[0];
    if (std::abs(x - 3.0) > 0.02) continue;
    s += d.labels[i];
    s2 += d.labels[i] * d.labels[i];
    ++n;
  }
  const double mm = s / n, v = s2 / n - mm * mm;
  CHECK(v / mm == doctest::Approx(2.0).epsilon(0.2));
  CHECK(dataset_csv_string(gen_misspec_nb(50, 3)) == dataset_csv_string(gen_misspec_nb(50, 3)));
}

TEST_CASE("beta study") {
  const auto d = gen_beta_study(300, 4);
  REQUIRE(d.size() == 302);
  CHECK(d.row(300)[0] == 1.0);
  CHECK(d.labels[300] == 16.0);
  CHECK(d.row(301)[0] == 10.0);
  CHECK(d.labels[301] == 10.0);
  CHECK(beta_study_gamma(8.0) == doctest::Approx(4.08));
  for (double x = 3.0; x <= 8.0; x += 0.01) CHECK(beta_study_gamma(x) > 0.0);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(d.row(i)[0] >= 3.0);
    CHECK(d.row(i)[0] <= 8.0);
  }
  CHECK(gen_beta_study(10, 4, 3).size() == 16);
  CHECK_THROWS_AS(gen_beta_study(10, 4, -1), DomainError);
}

TEST_CASE("sequential split") {
  const auto d = gen_misspec_poisson(10, 0);
  const auto s = split_sequential(d, 6, 2);
  CHECK(s.train.size() == 6);
  CHECK(s.val.size() == 2);
  CHECK(s.test.size() == 2);
  CHECK(s.test.labels.back() == d.labels.back());
  CHECK_THROWS_AS(split_sequential(d, 6, 4), DomainError);
}
