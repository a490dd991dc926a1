#include "stadloc/boundary_nodes.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

using Rule = boost::math::quadrature::gauss<double, 16>;

void add_panel(BoundaryNodes& nodes, const StadiumShape& shape, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  nodes.panels.emplace_back(a, b);
  // Boost stores the non-negative half of the symmetric rule.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    nodes.push(shape, mid - half * x[i], half * w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    nodes.push(shape, mid + half * x[i], half * w[i]);
  }
}

// Splits [a, b] into equal panels, refining dyadically toward the requested ends.
void add_piece(BoundaryNodes& nodes, const StadiumShape& shape, double a, double b,
               double max_panel, int levels, bool refine_left, bool refine_right) {
  if (b <= a) return;
  const auto count = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
  const double h = (b - a) / static_cast<double>(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double pa = a + h * static_cast<double>(j);
    const double pb = j + 1 == count ? b : pa + h;
    const bool left = refine_left && j == 0;
    const bool right = refine_right && j + 1 == count;
    if (levels <= 0 || (!left && !right)) {
      add_panel(nodes, shape, pa, pb);
      continue;
    }
    // Geometric split toward the junction end(s).
    std::vector<double> cuts{pa, pb};
    for (int l = 0; l < levels; ++l) {
      if (left) cuts.insert(cuts.begin() + 1, cuts[0] + 0.5 * (cuts[1] - cuts[0]));
      if (right) {
        const std::size_t n = cuts.size();
        cuts.insert(cuts.end() - 1, cuts[n - 1] - 0.5 * (cuts[n - 1] - cuts[n - 2]));
      }
    }
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) add_panel(nodes, shape, cuts[c], cuts[c + 1]);
  }
}

}  // namespace

void BoundaryNodes::push(const StadiumShape& shape, double arclength, double w) {
  const BoundaryPoint b = boundary_point(shape, arclength);
  s.push_back(arclength);
  weight.push_back(w);
  position.push_back(b.position);
  normal.push_back(b.normal);
  curvature.push_back(b.curvature);
}

BoundaryNodes quarter_panels(const StadiumShape& shape, double max_panel, int junction_levels) {
  if (!(max_panel > 0.0)) throw Error(ErrorCode::InvalidArgument, "panel length must be positive");
  BoundaryNodes nodes;
  const double j = shape.junction();
  add_piece(nodes, shape, 0.0, j, max_panel, junction_levels, false, shape.epsilon() > 0.0);
  add_piece(nodes, shape, j, shape.quarter_length(), max_panel, junction_levels, true, false);
  return nodes;
}

BoundaryNodes quarter_midpoints(const StadiumShape& shape, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty midpoint grid");
  BoundaryNodes nodes;
  const double h = shape.quarter_length() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push(shape, (static_cast<double>(i) + 0.5) * h, h);
  return nodes;
}

}  // namespace stadloc
