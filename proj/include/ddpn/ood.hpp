#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddpn/dataset.hpp"
#include "ddpn/ensemble.hpp"
#include "ddpn/metrics.hpp"

namespace ddpn {

struct OODProtocolConfig {
  double holdout_fraction = 0.2;
  int n_repeats = 10;
  std::vector<double> alpha_grid;  // empty means 0, 0.005, ..., 1
  std::uint64_t seed = 0;
  MomentMode variance_mode = MomentMode::EfronApprox;

  void validate() const;
  std::vector<double> effective_alpha_grid() const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over repeats
};

struct OODReport {
  std::vector<CurveMetrics> repeats;
  MeanStd auroc;
  MeanStd aupr;
  MeanStd fpr80;
};

// (1 - alpha) empirical quantile, linear interpolation between order statistics.
double fit_threshold(std::vector<double> holdout_scores, double alpha);

// Total ensemble predictive variance for every row.
std::vector<double> ood_scores(const Ensemble& ens, const Dataset& ds,
                               MomentMode mode = MomentMode::EfronApprox);

// The quantile-threshold protocol on precomputed scores.
OODReport run_ood_protocol(const std::vector<double>& id_scores,
                           const std::vector<double>& ood_scores, const OODProtocolConfig& cfg);

OODReport run_ood_eval(const Ensemble& ens, const Dataset& id_test, const Dataset& ood_set,
                       const OODProtocolConfig& cfg);

// {"auroc":{"mean","std"}, "aupr":{...}, "fpr80":{...}, "n_repeats"}
std::string ood_report_json(const OODReport& report);

}  // namespace ddpn
