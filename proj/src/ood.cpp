#include "ddpn/ood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "ddpn/errors.hpp"

namespace ddpn {

namespace {

MeanStd summarize(const std::vector<double>& v) {
  MeanStd out;
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

double fraction_above(const std::vector<double>& scores, double tau) {
  const auto n = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > tau; });
  return static_cast<double>(n) / static_cast<double>(scores.size());
}

}  // namespace

void OODProtocolConfig::validate() const {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw DomainError("holdout_fraction must lie in (0, 1)");
  }
  if (n_repeats < 1) throw DomainError("n_repeats must be positive");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0 && alpha_grid[i] <= 1.0)) {
      throw DomainError("alpha values must lie in [0, 1]");
    }
    if (i > 0 && alpha_grid[i] < alpha_grid[i - 1]) throw DomainError("alpha_grid must be sorted");
  }
}

std::vector<double> OODProtocolConfig::effective_alpha_grid() const {
  if (!alpha_grid.empty()) return alpha_grid;
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(k / 200.0);
  return grid;
}

double fit_threshold(std::vector<double> holdout_scores, double alpha) {
  if (holdout_scores.empty()) throw DomainError("threshold fitting needs holdout scores");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  std::sort(holdout_scores.begin(), holdout_scores.end());
  const double pos = (1.0 - alpha) * static_cast<double>(holdout_scores.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, holdout_scores.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return holdout_scores[lo] + frac * (holdout_scores[hi] - holdout_scores[lo]);
}

std::vector<double> ood_scores(const Ensemble& ens, const Dataset& ds, MomentMode mode) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.push_back(predict_decomposition(ens, ds.row(i), mode).total_var);
  }
  return out;
}

OODReport run_ood_protocol(const std::vector<double>& id_scores,
                           const std::vector<double>& ood_scores, const OODProtocolConfig& cfg) {
  cfg.validate();
  if (ood_scores.empty()) throw DomainError("the OOD set is empty");
  const auto n_holdout = static_cast<std::size_t>(
      std::llround(cfg.holdout_fraction * static_cast<double>(id_scores.size())));
  if (n_holdout < 1 || n_holdout >= id_scores.size()) {
    throw DomainError("in-distribution set too small for the requested holdout");
  }
  const auto alphas = cfg.effective_alpha_grid();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(id_scores.size());
  OODReport report;
  std::vector<double> aurocs, auprs, fprs;
  for (int rep = 0; rep < cfg.n_repeats; ++rep) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> holdout, remaining;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_holdout ? holdout : remaining).push_back(id_scores[order[i]]);
    }
    std::vector<OperatingPoint> points;
    points.reserve(alphas.size());
    for (double alpha : alphas) {
      const double tau = fit_threshold(holdout, alpha);
      const double tpr = fraction_above(ood_scores, tau);
      const double fpr = fraction_above(remaining, tau);
      const double tp = tpr * static_cast<double>(ood_scores.size());
      const double fp = fpr * static_cast<double>(remaining.size());
      points.push_back({fpr, tpr, tp + fp > 0.0 ? tp / (tp + fp) : 1.0});
    }
    const double prevalence = static_cast<double>(ood_scores.size()) /
                              static_cast<double>(ood_scores.size() + remaining.size());
    const auto m = curve_metrics_from_points(std::move(points), prevalence);
    report.repeats.push_back(m);
    aurocs.push_back(m.auroc);
    auprs.push_back(m.aupr);
    fprs.push_back(m.fpr80);
  }
  report.auroc = summarize(aurocs);
  report.aupr = summarize(auprs);
  report.fpr80 = summarize(fprs);
  return report;
}

OODReport run_ood_eval(const Ensemble& ens, const Dataset& id_test, const Dataset& ood_set,
                       const OODProtocolConfig& cfg) {
  if (ood_set.size() == 0) throw DomainError("the OOD set is empty");
  return run_ood_protocol(ood_scores(ens, id_test, cfg.variance_mode),
                          ood_scores(ens, ood_set, cfg.variance_mode), cfg);
}

std::string ood_report_json(const OODReport& report) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const MeanStd& ms) {
    j[key] = {{"mean", ms.mean}, {"std", ms.std}};
  };
  put("auroc", report.auroc);
  put("aupr", report.aupr);
  put("fpr80", report.fpr80);
  j["n_repeats"] = report.repeats.size();
  return j.dump(2) + "\n";
}

}  // namespace ddpn
