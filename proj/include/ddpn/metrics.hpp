#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddpn/distributions.hpp"

namespace ddpn {

double mae(std::span<const PredictiveDistribution> dists, std::span<const double> ys,
           const SupportTruncation& trunc = {});

// Continuous ranked probability score of one forecast against label y.
// Count kinds integrate the squared step-CDF gap exactly; Gaussians (and
// Gaussian mixtures) use the closed form.
double crps(const PredictiveDistribution& dist, double y, const SupportTruncation& trunc = {});

// Median of reciprocal variances.
double median_precision(std::span<const double> variances);

struct EvalRecord {
  std::vector<double> modes;
  std::vector<double> crps;
  std::vector<double> variances;
  double mae = 0.0;
  double crps_mean = 0.0;
  double median_precision = 0.0;
};

EvalRecord evaluate_predictions(std::span<const PredictiveDistribution> dists,
                                std::span<const double> ys,
                                MomentMode variance_mode = MomentMode::EfronApprox,
                                const SupportTruncation& trunc = {});

struct OODScores {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
};

struct CurveMetrics {
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr80 = 0.0;
};

// Rank-based metrics with OOD as the positive class. Ties in AUROC count 1/2.
CurveMetrics ood_curve_metrics(const OODScores& scores);

// One classifier operating point.
struct OperatingPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double precision = 1.0;
};

// Metrics from a traced set of operating points: trapezoidal ROC area
// (anchored at (0,0) and (1,1)), step-integrated precision over recall, and the
// FPR of the first point (by increasing TPR) reaching TPR >= 0.8.
CurveMetrics curve_metrics_from_points(std::vector<OperatingPoint> points, double prevalence);

// JSON object with keys mae, crps_mean, median_precision and, when given,
// auroc, aupr, fpr80.
std::string metrics_json(const EvalRecord& rec, const std::optional<CurveMetrics>& ood = {},
                         std::size_t n = 0);

}  // namespace ddpn
