#pragma once

#include <string>

#include "dyadot/assignment.hpp"
#include "dyadot/point_process.hpp"

namespace dyadot {

/// Local energy E(R) and data term D(R) of a matching around the centre c of
/// the owning box. The window is the ball B_R(c) for E(R) and for the
/// density terms, and the square (c-R, c+R)^2 for the two W^2 terms.
struct CostReport {
  double R = 0.0;
  double E_R = 0.0;
  double D_R = 0.0;
  double w2_mu = 0.0;    // W^2_{square}(mu, n) / R^2
  double dens_mu = 0.0;  // R^2 (n_mu - 1)^2 / n_mu, n_mu the ball density
  double w2_nu = 0.0;
  double dens_nu = 0.0;
  double n_mu = 0.0;
  double n_nu = 0.0;
  /// A window holds no points of one of the sets; the density term and D_R
  /// are then +infinity.
  bool infinite = false;
};

/// `plan` matches mu onto nu. The square window must lie inside mu's box and
/// have sides that are multiples of h.
CostReport compute_cost_report(const PointSet& mu, const PointSet& nu,
                               const MatchingPlan& plan, double R, double h = 0.25);

/// JSON object with E_R, D_R and the components w2_mu, dens_mu, w2_nu,
/// dens_nu.
std::string cost_report_json(const CostReport& report);

}  // namespace dyadot
