#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace wrapforge {

template <typename Scalar>
struct DistributionSummary {
  std::size_t n_raw = 0;
  std::size_t n_kept = 0;
  Scalar mean = 0;
  Scalar std = 0;  // population std of the kept values
  Scalar bandwidth = 0;
  std::vector<std::pair<Scalar, Scalar>> kde_grid;  // (x, density)
  bool point_mass = false;  // all kept values identical; kde_grid is empty
};

/// Silverman's rule: sample std * (3n/4)^(-1/5).
template <typename Derived>
typename Derived::Scalar silverman_bandwidth(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(x.size());
  const Scalar mean = x.mean();
  const Scalar sample_std = std::sqrt((x - mean).square().sum() / (n - Scalar(1)));
  return sample_std * std::pow(Scalar(3) * n / Scalar(4), Scalar(-0.2));
}

/// Gaussian KDE of `samples` evaluated at each point of `grid`.
template <typename DerivedS, typename DerivedG>
Eigen::Array<typename DerivedS::Scalar, Eigen::Dynamic, 1> gaussian_kde(
    const Eigen::ArrayBase<DerivedS>& samples, const Eigen::ArrayBase<DerivedG>& grid,
    typename DerivedS::Scalar bandwidth) {
  using Scalar = typename DerivedS::Scalar;
  const Scalar norm = Scalar(1) / (static_cast<Scalar>(samples.size()) * bandwidth *
                                   std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>));
  Eigen::Array<Scalar, Eigen::Dynamic, 1> density(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    density(i) = ((samples - grid(i)) / bandwidth).square().unaryExpr([](Scalar z) {
                   return std::exp(Scalar(-0.5) * z);
                 }).sum() * norm;
  }
  return density;
}

template <typename Scalar>
Scalar trapezoid_integral(const std::vector<std::pair<Scalar, Scalar>>& curve) {
  Scalar total = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    total += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) / Scalar(2);
  }
  return total;
}

/// Drops values at or beyond `outlier_sigma` population standard deviations
/// from the mean (one pass), recomputes the moments, and fits a Gaussian KDE
/// with Silverman bandwidth on `grid_points` points spanning
/// [min - 3h, max + 3h] of the kept values. Identical inputs give a point-mass
/// summary with std 0 and nothing removed. Throws std::invalid_argument for
/// fewer than two values, a non-finite value, a non-positive sigma, or a
/// sigma so small that nothing survives.
template <typename Scalar>
DistributionSummary<Scalar> summarize_distribution(std::span<const Scalar> values,
                                                   Scalar outlier_sigma = Scalar(2),
                                                   int grid_points = 256) {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  if (values.size() < 2) throw std::invalid_argument("summarize_distribution: need at least 2 values");
  if (grid_points < 2) throw std::invalid_argument("summarize_distribution: grid needs >= 2 points");
  if (!(outlier_sigma > Scalar(0))) throw std::invalid_argument("summarize_distribution: outlier_sigma must be > 0");
  const Eigen::Map<const Array> raw(values.data(), static_cast<Eigen::Index>(values.size()));
  if (!raw.allFinite()) throw std::invalid_argument("summarize_distribution: non-finite value");

  DistributionSummary<Scalar> out;
  out.n_raw = values.size();
  const Scalar raw_mean = raw.mean();
  const Scalar raw_std = std::sqrt((raw - raw_mean).square().mean());

  std::vector<Scalar> kept_values;
  kept_values.reserve(values.size());
  for (Scalar v : values) {
    if (raw_std == Scalar(0) || std::abs(v - raw_mean) < outlier_sigma * raw_std) kept_values.push_back(v);
  }
  if (kept_values.empty()) throw std::invalid_argument("summarize_distribution: outlier rule removed every value");
  const Eigen::Map<const Array> kept(kept_values.data(), static_cast<Eigen::Index>(kept_values.size()));
  out.n_kept = kept_values.size();
  out.mean = kept.mean();
  out.std = std::sqrt((kept - out.mean).square().mean());
  if (out.n_kept < 2 || out.std == Scalar(0)) {
    out.point_mass = true;
    return out;
  }
  out.bandwidth = silverman_bandwidth(kept);
  const Scalar lo = kept.minCoeff() - Scalar(3) * out.bandwidth;
  const Scalar hi = kept.maxCoeff() + Scalar(3) * out.bandwidth;
  const Array grid = Array::LinSpaced(grid_points, lo, hi);
  const Array density = gaussian_kde(kept, grid, out.bandwidth);
  out.kde_grid.reserve(static_cast<std::size_t>(grid_points));
  for (Eigen::Index i = 0; i < grid.size(); ++i) out.kde_grid.emplace_back(grid(i), density(i));
  return out;
}

nlohmann::ordered_json to_json(const DistributionSummary<double>& s);

}  // namespace wrapforge
