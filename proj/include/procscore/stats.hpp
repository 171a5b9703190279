#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include "procscore/error.hpp"

namespace procscore {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

namespace constants {
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double sqrt2pi = 2.50662827463100050242;
inline constexpr double ln2 = 0.693147180559945309417;
}  // namespace constants

template <typename Scalar>
Scalar normal_pdf(Scalar x) {
  using std::exp;
  return exp(Scalar(-0.5) * x * x) / Scalar(constants::sqrt2pi);
}

// Standard normal CDF. Written via erfc so that both tails keep full relative
// precision: Phi(-z) is never computed as 1 - Phi(z).
template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  using std::erfc;
  return Scalar(0.5) * erfc(-x / Scalar(constants::sqrt2));
}

inline double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::OutOfDomain, "normal quantile needs p in (0,1)");
  return -constants::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

template <typename Derived>
std::vector<typename Derived::Scalar> to_std_vector(const Eigen::DenseBase<Derived>& x) {
  std::vector<typename Derived::Scalar> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = x(i);
  return out;
}

template <typename Scalar>
Vector<Scalar> to_vector(const std::vector<Scalar>& x) {
  return Eigen::Map<const Vector<Scalar>>(x.data(), static_cast<Eigen::Index>(x.size()));
}

template <typename Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& x) {
  require(x.size() > 0, ErrorKind::EmptySamples, "mean of empty sample");
  return x.sum() / typename Derived::Scalar(x.size());
}

// Sample standard deviation with the n - 1 denominator.
template <typename Derived>
typename Derived::Scalar sample_sd(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto n = x.size();
  if (n < 2) return Scalar(0);
  const Scalar m = mean(x);
  Scalar ss = 0;
  for (Eigen::Index i = 0; i < n; ++i) ss += (x(i) - m) * (x(i) - m);
  return std::sqrt(ss / Scalar(n - 1));
}

// Quantile with linear interpolation between order statistics (Hyndman-Fan
// type 7). Input must be sorted ascending.
template <typename Scalar>
Scalar sorted_quantile(const std::vector<Scalar>& sorted, double p) {
  require(!sorted.empty(), ErrorKind::EmptySamples, "quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + Scalar(h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& x, double p) {
  auto sorted = to_std_vector(x);
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, p);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& x) {
  return quantile(x, 0.5);
}

template <typename Derived>
typename Derived::Scalar interquartile_range(const Eigen::DenseBase<Derived>& x) {
  auto sorted = to_std_vector(x);
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
}

// Silverman's rule of thumb, 0.9 * min(sd, IQR/1.34) * n^(-1/5). When the
// IQR collapses but the sample still varies, the sd alone is used.
template <typename Derived>
typename Derived::Scalar silverman_bandwidth(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  require(x.size() >= 2, ErrorKind::DegenerateSample, "Silverman bandwidth needs at least two samples");
  const Scalar sd = sample_sd(x);
  require(sd > Scalar(0), ErrorKind::DegenerateSample, "zero-variance sample");
  Scalar spread = std::min(sd, interquartile_range(x) / Scalar(1.34));
  if (!(spread > Scalar(0))) spread = sd;
  return Scalar(0.9) * spread * std::pow(Scalar(x.size()), Scalar(-0.2));
}

namespace detail {

// Pairwise distance counts of the binned sample: entry (k, c) says that c
// unordered pairs have bin indices differing by k. Only nonzero k-counts are
// kept, ascending in k. Small samples keep their exact distances instead
// (bin_width 1, one entry per pair).
struct BinnedPairs {
  double bin_width = 0;
  std::vector<std::pair<double, double>> counts;
};

inline BinnedPairs binned_pair_counts(const std::vector<double>& x, std::size_t n_bins) {
  BinnedPairs out;
  if (x.size() <= n_bins / 2) {
    out.bin_width = 1.0;
    out.counts.reserve(x.size() * (x.size() - 1) / 2);
    for (std::size_t i = 1; i < x.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) out.counts.emplace_back(std::abs(x[i] - x[j]), 1.0);
    std::sort(out.counts.begin(), out.counts.end());
    return out;
  }
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  out.bin_width = (*hi_it - lo) * 1.01 / static_cast<double>(n_bins);
  std::vector<double> dense(n_bins, 0.0);
  std::vector<std::size_t> bin(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    bin[i] = std::min(static_cast<std::size_t>((x[i] - lo) / out.bin_width), n_bins - 1);
  std::vector<double> occupancy(n_bins, 0.0);
  for (auto b : bin) occupancy[b] += 1.0;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double w = occupancy[i];
    if (w == 0.0) continue;
    dense[0] += 0.5 * w * (w - 1.0);
    for (std::size_t j = 0; j < i; ++j) dense[i - j] += w * occupancy[j];
  }
  for (std::size_t k = 0; k < n_bins; ++k)
    if (dense[k] != 0.0) out.counts.emplace_back(static_cast<double>(k), dense[k]);
  return out;
}

// Binned estimates of the density functionals int f''^2 (phi4) and
// -int f''' f' (phi6) with a Gaussian pilot of bandwidth h.
inline double phi4(const BinnedPairs& pairs, double n, double h) {
  double sum = 0;
  for (const auto& [k, count] : pairs.counts) {
    double delta = k * pairs.bin_width / h;
    delta *= delta;
    if (delta >= 1000.0) break;
    sum += std::exp(-delta / 2.0) * (delta * delta - 6.0 * delta + 3.0) * count;
  }
  sum = 2.0 * sum + 3.0 * n;
  return sum / (n * (n - 1.0) * std::pow(h, 5.0) * constants::sqrt2pi);
}

inline double phi6(const BinnedPairs& pairs, double n, double h) {
  double sum = 0;
  for (const auto& [k, count] : pairs.counts) {
    double delta = k * pairs.bin_width / h;
    delta *= delta;
    if (delta >= 1000.0) break;
    sum += std::exp(-delta / 2.0) * (delta * delta * delta - 15.0 * delta * delta + 45.0 * delta - 15.0) * count;
  }
  sum = 2.0 * sum - 15.0 * n;
  return sum / (n * (n - 1.0) * std::pow(h, 7.0) * constants::sqrt2pi);
}

}  // namespace detail

// Sheather-Jones "solve-the-equation" plug-in bandwidth for a Gaussian
// kernel. Above 500 samples the pilot functionals use binned pair counts
// (1000 bins).
// Throws DegenerateSample when the sample is too small, has no spread, or the
// fixed-point equation has no root; callers decide whether to fall back.
template <typename Derived>
double sheather_jones_bandwidth(const Eigen::DenseBase<Derived>& samples) {
  const auto x = to_std_vector(samples.template cast<double>());
  const auto n_int = x.size();
  require(n_int >= 5, ErrorKind::DegenerateSample, "Sheather-Jones needs at least five samples");
  const double n = static_cast<double>(n_int);
  const auto xs = to_vector(x);
  const double sd = sample_sd(xs);
  require(sd > 0.0, ErrorKind::DegenerateSample, "zero-variance sample");
  const double scale = std::min(sd, interquartile_range(xs) / 1.349);
  require(scale > 0.0, ErrorKind::DegenerateSample, "sample has zero interquartile range");

  const auto pairs = detail::binned_pair_counts(x, 1000);
  const double a = 1.24 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(n, -1.0 / 9.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(M_PI) * n);
  const double td = -detail::phi6(pairs, n, b);
  require(std::isfinite(td) && td > 0.0, ErrorKind::DegenerateSample, "sample too sparse for the phi6 pilot");
  const double alpha2 = 1.357 * std::pow(detail::phi4(pairs, n, a) / td, 1.0 / 7.0);
  require(std::isfinite(alpha2), ErrorKind::DegenerateSample, "sample too sparse for the phi4 pilot");

  const auto equation = [&](double h) {
    return std::pow(c1 / detail::phi4(pairs, n, alpha2 * std::pow(h, 5.0 / 7.0)), 0.2) - h;
  };
  const double h_max = 1.144 * scale * std::pow(n, -0.2);
  double lower = 0.1 * h_max;
  double upper = h_max;
  for (int attempt = 1; !(equation(lower) * equation(upper) <= 0.0); ++attempt) {
    require(attempt < 100, ErrorKind::DegenerateSample, "no Sheather-Jones root in the search range");
    if (attempt % 2) upper *= 1.2;
    else lower /= 1.2;
  }
  std::uintmax_t max_iter = 200;
  const auto [left, right] = boost::math::tools::toms748_solve(
      equation, lower, upper, boost::math::tools::eps_tolerance<double>(48), max_iter);
  return 0.5 * (left + right);
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
template <typename Derived>
double ks_uniform_statistic(const Eigen::DenseBase<Derived>& scores) {
  require(scores.size() >= 20, ErrorKind::TooFewSamples, "KS uniformity check needs at least 20 scores");
  auto sorted = to_std_vector(scores.template cast<double>());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double statistic = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = std::clamp(sorted[i], 0.0, 1.0);
    const double above = (static_cast<double>(i) + 1.0) / n - u;
    const double below = u - static_cast<double>(i) / n;
    statistic = std::max({statistic, above, below});
  }
  return std::clamp(statistic, 0.0, 1.0);
}

}  // namespace procscore
