#include "ddpn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "ddpn/errors.hpp"

namespace ddpn {

namespace {

// E|X| for X ~ N(m, s2).
double abs_normal_mean(double m, double s2) {
  const double s = std::sqrt(s2);
  const double z = m / s;
  return 2.0 * s * normal_pdf(z) + m * (2.0 * normal_cdf(z) - 1.0);
}

double gaussian_crps(const std::vector<GaussianParams>& comps, double y) {
  const double m = static_cast<double>(comps.size());
  double first = 0.0, second = 0.0;
  for (const auto& a : comps) {
    first += abs_normal_mean(y - a.mu, a.sigma2);
    for (const auto& b : comps) second += abs_normal_mean(a.mu - b.mu, a.sigma2 + b.sigma2);
  }
  return first / m - 0.5 * second / (m * m);
}

double discrete_crps(const PmfTable& table, double y) {
  // F is constant on [k, k+1); integrate (F(k) - 1{z >= y})^2 piece by piece.
  double acc = y < 0.0 ? -y : 0.0;
  long double cdf = 0.0L;
  const double y_pos = std::max(y, 0.0);
  for (std::size_t k = 0;; ++k) {
    if (k < table.probs.size()) cdf += table.probs[k];
    const double f = static_cast<double>(std::min(cdf, 1.0L));
    const double lo = static_cast<double>(k);
    const double hi = lo + 1.0;
    const double below = f * f;
    const double above = (f - 1.0) * (f - 1.0);
    if (hi <= y_pos) {
      acc += below;
    } else if (lo >= y_pos) {
      acc += above;
    } else {
      acc += (y_pos - lo) * below + (hi - y_pos) * above;
    }
    // Beyond the table F is frozen at its total, so (F - 1)^2 is at most the
    // squared truncation shortfall and the remaining tail is dropped.
    if (k + 1 >= table.probs.size() && lo >= y_pos) break;
  }
  return acc;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double mae(std::span<const PredictiveDistribution> dists, std::span<const double> ys,
           const SupportTruncation& trunc) {
  if (dists.size() != ys.size()) throw ShapeError("mae needs one label per prediction");
  if (dists.empty()) throw ShapeError("mae of an empty batch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < ys.size(); ++i) acc += std::abs(ys[i] - dist_mode(dists[i], trunc));
  return static_cast<double>(acc / static_cast<long double>(ys.size()));
}

double crps(const PredictiveDistribution& dist, double y, const SupportTruncation& trunc) {
  if (dist.is_discrete()) return discrete_crps(pmf_table(dist, trunc), y);
  std::vector<GaussianParams> comps;
  if (dist.kind() == DistKind::Gaussian) {
    comps.push_back(std::get<GaussianParams>(dist.params()));
  } else {
    for (const auto& c : dist.components()) comps.push_back(std::get<GaussianParams>(c.params()));
  }
  return std::max(0.0, gaussian_crps(comps, y));
}

double median_precision(std::span<const double> variances) {
  if (variances.empty()) throw ShapeError("median precision of an empty list");
  std::vector<double> precisions;
  precisions.reserve(variances.size());
  for (double v : variances) {
    if (!(v > 0.0)) throw DomainError("predictive variances must be positive");
    precisions.push_back(1.0 / v);
  }
  return median_of(std::move(precisions));
}

EvalRecord evaluate_predictions(std::span<const PredictiveDistribution> dists,
                                std::span<const double> ys, MomentMode variance_mode,
                                const SupportTruncation& trunc) {
  if (dists.size() != ys.size() || dists.empty()) {
    throw ShapeError("evaluation needs one label per prediction");
  }
  EvalRecord rec;
  long double abs_err = 0.0L, crps_sum = 0.0L;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double mode = dist_mode(dists[i], trunc);
    const double score = crps(dists[i], ys[i], trunc);
    rec.modes.push_back(mode);
    rec.crps.push_back(score);
    rec.variances.push_back(dist_moments(dists[i], variance_mode, trunc).variance);
    abs_err += std::abs(ys[i] - mode);
    crps_sum += score;
  }
  const auto n = static_cast<long double>(ys.size());
  rec.mae = static_cast<double>(abs_err / n);
  rec.crps_mean = static_cast<double>(crps_sum / n);
  rec.median_precision = median_precision(rec.variances);
  return rec;
}

CurveMetrics ood_curve_metrics(const OODScores& scores) {
  const auto& id = scores.id_scores;
  const auto& ood = scores.ood_scores;
  if (id.empty() || ood.empty()) throw DomainError("OOD metrics need both score lists");

  struct Item {
    double score;
    bool is_ood;
  };
  std::vector<Item> items;
  items.reserve(id.size() + ood.size());
  for (double s : id) items.push_back({s, false});
  for (double s : ood) items.push_back({s, true});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  const double n_id = static_cast<double>(id.size());
  const double n_ood = static_cast<double>(ood.size());

  // Mann-Whitney statistic with midranks.
  long double ood_rank_sum = 0.0L;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const long double midrank = 0.5L * static_cast<long double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (items[k].is_ood) ood_rank_sum += midrank;
    }
    i = j;
  }
  CurveMetrics out;
  out.auroc = static_cast<double>((ood_rank_sum - 0.5L * n_ood * (n_ood + 1.0)) / (n_ood * n_id));

  // Thresholds from high to low; everything >= threshold is flagged OOD.
  double tp = 0.0, fp = 0.0, prev_recall = 0.0;
  long double ap = 0.0L;
  out.fpr80 = 1.0;
  bool fpr80_set = false;
  for (std::size_t i = items.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && items[j - 1].score == items[i - 1].score) {
      --j;
      (items[j].is_ood ? tp : fp) += 1.0;
    }
    const double recall = tp / n_ood;
    const double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    if (!fpr80_set && recall >= 0.8) {
      out.fpr80 = fp / n_id;
      fpr80_set = true;
    }
    i = j;
  }
  out.aupr = static_cast<double>(ap);
  return out;
}

CurveMetrics curve_metrics_from_points(std::vector<OperatingPoint> points, double prevalence) {
  points.push_back({0.0, 0.0, 1.0});
  points.push_back({1.0, 1.0, prevalence});

  std::sort(points.begin(), points.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  CurveMetrics out;
  long double area = 0.0L;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += 0.5L * (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr);
  }
  out.auroc = static_cast<double>(area);

  std::sort(points.begin(), points.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    return a.tpr != b.tpr ? a.tpr < b.tpr : a.precision > b.precision;
  });
  long double ap = 0.0L;
  double prev_recall = 0.0;
  for (const auto& p : points) {
    if (p.tpr > prev_recall) {
      ap += (p.tpr - prev_recall) * p.precision;
      prev_recall = p.tpr;
    }
  }
  out.aupr = static_cast<double>(ap);

  out.fpr80 = 1.0;
  for (const auto& p : points) {
    if (p.tpr >= 0.8) out.fpr80 = std::min(out.fpr80, p.fpr);
  }
  return out;
}

std::string metrics_json(const EvalRecord& rec, const std::optional<CurveMetrics>& ood,
                         std::size_t n) {
  nlohmann::ordered_json j;
  j["mae"] = rec.mae;
  j["crps_mean"] = rec.crps_mean;
  j["median_precision"] = rec.median_precision;
  j["n"] = n == 0 ? rec.crps.size() : n;
  if (ood) {
    j["auroc"] = ood->auroc;
    j["aupr"] = ood->aupr;
    j["fpr80"] = ood->fpr80;
  }
  return j.dump(2) + "\n";
}

}  // namespace ddpn
