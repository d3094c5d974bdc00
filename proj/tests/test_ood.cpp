#include <random>

#include "doctest.h"

#include "ddpn/errors.hpp"
#include "ddpn/ood.hpp"

using namespace ddpn;

TEST_CASE("threshold fitting") {
  const std::vector<double> s{3, 1, 4, 2};
  CHECK(fit_threshold(s, 0.0) == 4.0);
  CHECK(fit_threshold(s, 1.0) == 1.0);
  CHECK(fit_threshold(s, 0.5) == 2.5);
  CHECK_THROWS_AS(fit_threshold({}, 0.5), DomainError);

  Rng rng(1);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(37);
  for (auto& x : v) x = ex(rng);
  double prev = fit_threshold(v, 0.0);
  for (int k = 1; k <= 100; ++k) {
    const double t = fit_threshold(v, k / 100.0);
    CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("protocol on synthetic scores") {
  Rng rng(3);
  std::normal_distribution<double> id_dist(1.0, 0.3), ood_dist(3.0, 0.5);
  std::vector<double> id(200), ood(100);
  for (auto& x : id) x = id_dist(rng);
  for (auto& x : ood) x = ood_dist(rng);

  OODProtocolConfig cfg;
  cfg.seed = 11;
  const auto a = run_ood_protocol(id, ood, cfg);
  const auto b = run_ood_protocol(id, ood, cfg);
  CHECK(a.repeats.size() == 10);
  CHECK(a.auroc.mean == b.auroc.mean);
  CHECK(a.aupr.std == b.aupr.std);
  CHECK(a.auroc.mean > 0.95);

  SUBCASE("sweep agrees with the rank statistic") {
    std::normal_distribution<double> near(1.4, 0.4);
    std::vector<double> shifted(150);
    for (auto& x : shifted) x = near(rng);
    cfg.n_repeats = 1;
    cfg.holdout_fraction = 0.5;
    const auto rep = run_ood_protocol(id, shifted, cfg);
    const double rank = ood_curve_metrics({id, shifted}).auroc;
    CHECK(std::abs(rep.auroc.mean - rank) < 0.05);
  }
  SUBCASE("one repeat has zero spread") {
    cfg.n_repeats = 1;
    const auto r = run_ood_protocol(id, ood, cfg);
    CHECK(r.auroc.std == 0.0);
    CHECK(r.aupr.std == 0.0);
    CHECK(r.fpr80.std == 0.0);
  }
  SUBCASE("indistinguishable populations") {
    std::vector<double> same(200);
    for (auto& x : same) x = id_dist(rng);
    const auto r = run_ood_protocol(id, same, cfg);
    CHECK(std::abs(r.auroc.mean - 0.5) < 0.1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(run_ood_protocol(id, {}, cfg), DomainError);
    cfg.holdout_fraction = 1.5;
    CHECK_THROWS_AS(run_ood_protocol(id, ood, cfg), DomainError);
  }
  SUBCASE("json schema") {
    const auto j = ood_report_json(a);
    for (const char* k : {"\"auroc\"", "\"aupr\"", "\"fpr80\"", "\"mean\"", "\"std\"", "\"n_repeats\": 10"}) {
      CHECK(j.find(k) != std::string::npos);
    }
  }
}

TEST_CASE("scores are the ensemble total variance") {
  MLPConfig cfg;
  cfg.hidden_widths = {4};
  std::vector<EnsembleMember> ms;
  for (int k = 0; k < 3; ++k) {
    cfg.seed = 40 + k;
    ms.push_back({init_mlp(cfg, 0.2), {Family::DoublePoisson, 0.0}});
  }
  const Ensemble ens(ms);
  Dataset ds;
  for (double x : {-1.0, 0.0, 2.5}) ds.push_back(std::vector<double>{x}, 1.0);
  const auto s = ood_scores(ens, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(s[i] == predict_decomposition(ens, ds.row(i)).total_var);
  }
}
