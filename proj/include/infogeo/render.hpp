#pragma once

// 2-D SVG figures: obstacles, goal box, tree edges and χ² covariance ellipses.

#include <string>

#include "infogeo/belief.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/planner.hpp"

namespace infogeo {

struct RenderScene {
  const Environment* env = nullptr;  // optional
  const BeliefTree* tree = nullptr;  // optional
  const BeliefChain* path = nullptr;  // optional; its ellipses are drawn when present
  double chi2 = 1.0;
  /// With no path, ellipses of every tree node are drawn.
  bool tree_ellipses = true;
};

/// Throws ValidationError for anything that is not 2-D.
std::string render_svg(const RenderScene& scene);

}  // namespace infogeo
