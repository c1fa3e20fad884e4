#include "wrapforge/distribution.hpp"

namespace wrapforge {

nlohmann::ordered_json to_json(const DistributionSummary<double>& s) {
  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  for (const auto& [x, d] : s.kde_grid) grid.push_back({x, d});
  return {{"n_raw", s.n_raw},       {"n_kept", s.n_kept},     {"mean", s.mean},
          {"std", s.std},           {"bandwidth", s.bandwidth}, {"point_mass", s.point_mass},
          {"kde_grid", std::move(grid)}};
}

}  // namespace wrapforge
