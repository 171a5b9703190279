#pragma once

#include <string>
#include <variant>

#include "procscore/stats.hpp"

namespace procscore {

struct SheatherJones {};
struct Silverman {};
struct FixedBandwidth {
  double h = 0;
};

// How a kernel bandwidth is chosen: Sheather-Jones (falling back to
// Silverman on small or degenerate samples), Silverman, or a fixed value.
using BandwidthRule = std::variant<SheatherJones, Silverman, FixedBandwidth>;

// Parses "sj", "silverman" or "fixed:<h>".
BandwidthRule parse_bandwidth_rule(const std::string& text);
std::string to_string(const BandwidthRule& rule);

// Applies the rule to the sample. SJ falls back to Silverman below five
// samples or when the SJ equation has no root; a zero-variance sample throws
// DegenerateSample under every data-driven rule.
template <typename Derived>
double select_bandwidth(const BandwidthRule& rule, const Eigen::DenseBase<Derived>& samples) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) {
    require(fixed->h > 0.0 && std::isfinite(fixed->h), ErrorKind::InvalidConfig, "fixed bandwidth must be positive");
    return fixed->h;
  }
  if (std::holds_alternative<SheatherJones>(rule) && samples.size() >= 5) {
    try {
      return sheather_jones_bandwidth(samples);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSample) throw;
    }
  }
  return static_cast<double>(silverman_bandwidth(samples));
}

// Univariate Gaussian kernel density estimate with equal sample weights.
template <typename Scalar>
class GaussianKde {
 public:
  GaussianKde() = default;
  GaussianKde(Vector<Scalar> samples, Scalar bandwidth) : samples_(std::move(samples)), bandwidth_(bandwidth) {
    require(samples_.size() > 0, ErrorKind::EmptySamples, "KDE needs samples");
    require(bandwidth_ > Scalar(0), ErrorKind::InvalidConfig, "KDE bandwidth must be positive");
  }

  template <typename Derived>
  static GaussianKde fit(const Eigen::DenseBase<Derived>& samples, const BandwidthRule& rule) {
    return GaussianKde(samples.template cast<Scalar>(), Scalar(select_bandwidth(rule, samples)));
  }

  Scalar pdf(Scalar x) const {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < samples_.size(); ++j) sum += normal_pdf((x - samples_(j)) / bandwidth_);
    return sum / (Scalar(samples_.size()) * bandwidth_);
  }

  Scalar cdf(Scalar x) const {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < samples_.size(); ++j) sum += normal_cdf((x - samples_(j)) / bandwidth_);
    return sum / Scalar(samples_.size());
  }

  // 1 - cdf(x), accumulated from upper-tail terms to keep precision for
  // large x.
  Scalar ccdf(Scalar x) const {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < samples_.size(); ++j) sum += normal_cdf((samples_(j) - x) / bandwidth_);
    return sum / Scalar(samples_.size());
  }

  // Argmax of the density over an equispaced grid spanning the sample range
  // widened by three bandwidths; ties resolve to the leftmost grid point.
  Scalar mode(int grid_points = 1024) const {
    const Scalar lo = samples_.minCoeff() - Scalar(3) * bandwidth_;
    const Scalar hi = samples_.maxCoeff() + Scalar(3) * bandwidth_;
    Scalar best_x = lo;
    Scalar best_f = Scalar(-1);
    for (int g = 0; g < grid_points; ++g) {
      const Scalar x = lo + (hi - lo) * Scalar(g) / Scalar(grid_points - 1);
      const Scalar f = pdf(x);
      if (f > best_f) {
        best_f = f;
        best_x = x;
      }
    }
    return best_x;
  }

  const Vector<Scalar>& samples() const { return samples_; }
  Scalar bandwidth() const { return bandwidth_; }

 private:
  Vector<Scalar> samples_;
  Scalar bandwidth_ = 1;
};

}  // namespace procscore
