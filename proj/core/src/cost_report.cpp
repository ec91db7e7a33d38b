#include "dyadot/cost_report.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dyadot/semidiscrete.hpp"
#include "json.hpp"

namespace dyadot {

namespace {

struct WindowTerms {
  double w2 = 0.0;
  double dens = 0.0;
  double n_ball = 0.0;
  bool infinite = false;
};

WindowTerms window_terms(const PointSet& ps, const Box& square, const Point& c, double R,
                         double h) {
  WindowTerms t;
  std::size_t in_ball = 0;
  for (const Point& p : ps) {
    if (squared_distance(p, c) < R * R) ++in_ball;
  }
  t.n_ball = static_cast<double>(in_ball) / (std::numbers::pi * R * R);
  const PointSet local = restrict_to(ps, square);
  if (local.empty() || in_ball == 0) {
    t.infinite = true;
    t.dens = std::numeric_limits<double>::infinity();
  }
  if (!local.empty()) {
    const double n_square = static_cast<double>(local.size()) / square.area();
    t.w2 = semidiscrete_w2(local, square, n_square, h).value / (R * R);
  }
  if (!t.infinite) t.dens = R * R * (t.n_ball - 1.0) * (t.n_ball - 1.0) / t.n_ball;
  return t;
}

}  // namespace

CostReport compute_cost_report(const PointSet& mu, const PointSet& nu,
                               const MatchingPlan& plan, double R, double h) {
  if (!(R > 0.0)) throw std::invalid_argument("compute_cost_report: R must be positive");
  if (mu.size() != nu.size()) {
    throw std::invalid_argument("compute_cost_report: sets differ in size");
  }
  validate_plan(plan, mu.size());
  const Point c = mu.box().center();
  const Box square(c.x - R, c.y - R, c.x + R, c.y + R);
  if (!mu.box().contains(square) || !nu.box().contains(square)) {
    throw std::invalid_argument("compute_cost_report: window leaves the owning box");
  }

  CostReport report;
  report.R = R;
  double energy = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Point& x = mu[i];
    const Point& tx = nu[static_cast<std::size_t>(plan.sigma[i])];
    if (squared_distance(x, c) < R * R || squared_distance(tx, c) < R * R) {
      energy += squared_distance(x, tx);
    }
  }
  report.E_R = energy / (R * R);

  const WindowTerms m = window_terms(mu, square, c, R, h);
  const WindowTerms n = window_terms(nu, square, c, R, h);
  report.w2_mu = m.w2;
  report.dens_mu = m.dens;
  report.n_mu = m.n_ball;
  report.w2_nu = n.w2;
  report.dens_nu = n.dens;
  report.n_nu = n.n_ball;
  report.infinite = m.infinite || n.infinite;
  report.D_R = report.infinite ? std::numeric_limits<double>::infinity()
                               : report.w2_mu + report.dens_mu + report.w2_nu + report.dens_nu;
  return report;
}

std::string cost_report_json(const CostReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j;
  j["R"] = r.R;
  j["E_R"] = r.E_R;
  j["D_R"] = num(r.D_R);
  j["w2_mu"] = num(r.w2_mu);
  j["dens_mu"] = num(r.dens_mu);
  j["w2_nu"] = num(r.w2_nu);
  j["dens_nu"] = num(r.dens_nu);
  j["n_mu"] = r.n_mu;
  j["n_nu"] = r.n_nu;
  j["infinite"] = r.infinite;
  return j.dump();
}

}  // namespace dyadot
