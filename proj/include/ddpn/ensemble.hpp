#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ddpn/distributions.hpp"
#include "ddpn/losses.hpp"
#include "ddpn/network.hpp"

namespace ddpn {

struct EnsembleMember {
  MLPWeights weights;
  LossSpec loss;
};

// Uniform mixture over M >= 1 members of one family.
class Ensemble {
 public:
  explicit Ensemble(std::vector<EnsembleMember> members);

  std::size_t size() const { return members_.size(); }
  Family family() const { return members_.front().loss.family; }
  const std::vector<EnsembleMember>& members() const { return members_; }

 private:
  std::vector<EnsembleMember> members_;
};

struct UncertaintyDecomposition {
  double total_var = 0.0;
  double aleatoric = 0.0;  // mean member variance
  double epistemic = 0.0;  // variance of member means
};

// Turns raw head outputs into the family's predictive distribution.
PredictiveDistribution distribution_from_head(Family family, const HeadOutput& head);

PredictiveDistribution member_predict(const EnsembleMember& member, std::span<const double> x);
PredictiveDistribution mixture_predict(const Ensemble& ens, std::span<const double> x);

// Mean and variance of a uniform mixture given member means and variances.
Moments mixture_moments(std::span<const double> means, std::span<const double> vars);
UncertaintyDecomposition decompose_variance(std::span<const double> means,
                                            std::span<const double> vars);

// Decomposition for one input; DP member variances use `mode`.
UncertaintyDecomposition predict_decomposition(const Ensemble& ens, std::span<const double> x,
                                               MomentMode mode = MomentMode::EfronApprox);

// Manifest: header line `ddpnkit-ensemble v1 family=<name>`, then one
// checkpoint path per line. Relative paths resolve against the manifest's directory.
std::string ensemble_manifest_string(Family family,
                                     const std::vector<std::filesystem::path>& members);
void write_ensemble_manifest(const std::filesystem::path& path, Family family,
                             const std::vector<std::filesystem::path>& members);
Ensemble load_ensemble(const std::filesystem::path& manifest);

}  // namespace ddpn
