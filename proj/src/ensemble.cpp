#include "ddpn/ensemble.hpp"

#include <cmath>
#include <sstream>

#include "ddpn/errors.hpp"
#include "ddpn/io.hpp"
#include "ddpn/text.hpp"

namespace ddpn {

namespace {
constexpr const char* kManifestMagic = "ddpnkit-ensemble v1";
}

Ensemble::Ensemble(std::vector<EnsembleMember> members) : members_(std::move(members)) {
  if (members_.empty()) throw DomainError("an ensemble needs at least one member");
  const Family f = members_.front().loss.family;
  const int dim = members_.front().weights.config().input_dim;
  for (const auto& m : members_) {
    if (m.loss.family != f) throw DomainError("ensemble members must share one family");
    if (m.weights.config().input_dim != dim) throw ShapeError("ensemble input widths differ");
    if (m.weights.config().head_count != head_count(f)) {
      throw ShapeError("member head count does not match its family");
    }
  }
}

PredictiveDistribution distribution_from_head(Family family, const HeadOutput& head) {
  auto dispersion = [&]() {
    if (!head.log_dispersion) throw ShapeError("missing dispersion head output");
    return std::exp(*head.log_dispersion);
  };
  switch (family) {
    case Family::DoublePoisson:
      return PredictiveDistribution::double_poisson(std::exp(head.location), dispersion());
    case Family::Poisson:
      return PredictiveDistribution::poisson(std::exp(head.location));
    case Family::NegBinomial: {
      const auto shape = nb_shape_from_mean_dispersion(std::exp(head.location), dispersion());
      return PredictiveDistribution::neg_binomial(shape.r, shape.p);
    }
    case Family::Gaussian:
      return PredictiveDistribution::gaussian(head.location, dispersion());
  }
  throw UsageError("unknown family");
}

PredictiveDistribution member_predict(const EnsembleMember& member, std::span<const double> x) {
  return distribution_from_head(member.loss.family, forward(member.weights, x));
}

PredictiveDistribution mixture_predict(const Ensemble& ens, std::span<const double> x) {
  std::vector<PredictiveDistribution> comps;
  comps.reserve(ens.size());
  for (const auto& m : ens.members()) comps.push_back(member_predict(m, x));
  return PredictiveDistribution::mixture(std::move(comps));
}

Moments mixture_moments(std::span<const double> means, std::span<const double> vars) {
  if (means.empty() || means.size() != vars.size()) {
    throw ShapeError("mixture moments need equal-length nonempty lists");
  }
  const double m = static_cast<double>(means.size());
  long double mean = 0.0L, second = 0.0L;
  for (std::size_t i = 0; i < means.size(); ++i) {
    mean += means[i];
    second += static_cast<long double>(vars[i]) +
              static_cast<long double>(means[i]) * means[i];
  }
  mean /= m;
  return {static_cast<double>(mean), static_cast<double>(second / m - mean * mean)};
}

UncertaintyDecomposition decompose_variance(std::span<const double> means,
                                            std::span<const double> vars) {
  const auto mm = mixture_moments(means, vars);
  const double m = static_cast<double>(means.size());
  long double alea = 0.0L, epi = 0.0L;
  for (std::size_t i = 0; i < means.size(); ++i) {
    alea += vars[i];
    const long double d = static_cast<long double>(means[i]) - mm.mean;
    epi += d * d;
  }
  UncertaintyDecomposition u;
  u.aleatoric = static_cast<double>(alea / m);
  u.epistemic = static_cast<double>(epi / m);
  // Reported as the sum so the identity holds to rounding; mixture_moments
  // agrees with it up to cancellation in E[X^2] - E[X]^2.
  u.total_var = u.aleatoric + u.epistemic;
  return u;
}

UncertaintyDecomposition predict_decomposition(const Ensemble& ens, std::span<const double> x,
                                               MomentMode mode) {
  std::vector<double> means, vars;
  means.reserve(ens.size());
  vars.reserve(ens.size());
  for (const auto& m : ens.members()) {
    const auto mom = dist_moments(member_predict(m, x), mode);
    means.push_back(mom.mean);
    vars.push_back(mom.variance);
  }
  return decompose_variance(means, vars);
}

std::string ensemble_manifest_string(Family family,
                                     const std::vector<std::filesystem::path>& members) {
  std::ostringstream os;
  os << kManifestMagic << " family=" << family_name(family) << '\n';
  for (const auto& m : members) os << m.generic_string() << '\n';
  return os.str();
}

void write_ensemble_manifest(const std::filesystem::path& path, Family family,
                             const std::vector<std::filesystem::path>& members) {
  write_file_atomic(path, ensemble_manifest_string(family, members));
}

Ensemble load_ensemble(const std::filesystem::path& manifest) {
  std::istringstream is(read_file(manifest));
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty ensemble manifest");
  const auto header = split(trim(line), ' ');
  if (header.size() != 3 || header[0] + " " + header[1] != kManifestMagic ||
      header[2].rfind("family=", 0) != 0) {
    throw IoError("not a ddpnkit v1 ensemble manifest: " + manifest.string());
  }
  const Family family = parse_family(header[2].substr(7));
  std::vector<EnsembleMember> members;
  while (std::getline(is, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    std::filesystem::path p{std::string(t)};
    if (p.is_relative()) p = manifest.parent_path() / p;
    auto ckpt = load_checkpoint(p);
    if (ckpt.loss.family != family) {
      throw IoError("checkpoint " + p.string() + " does not match the manifest family");
    }
    members.push_back({std::move(ckpt.weights), ckpt.loss});
  }
  return Ensemble(std::move(members));
}

}  // namespace ddpn
