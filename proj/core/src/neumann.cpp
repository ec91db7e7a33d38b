#include "dyadot/neumann.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dyadot {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Forward DCT-II and inverse DCT-III pair on an m x m array, with buffers.
// The round trip multiplies by (2m)^2.
class CosinePair {
 public:
  explicit CosinePair(int m) : m_(m) {
    const std::size_t n = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
    buf_ = fftw_alloc_real(n);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_r2r_2d(m, m, buf_, buf_, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    inv_ = fftw_plan_r2r_2d(m, m, buf_, buf_, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
  }
  ~CosinePair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  CosinePair(const CosinePair&) = delete;
  CosinePair& operator=(const CosinePair&) = delete;

  double* data() { return buf_; }
  void forward() { fftw_execute(fwd_); }
  void inverse() { fftw_execute(inv_); }

 private:
  int m_;
  double* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

CosinePair& cosine_pair(std::int64_t m) {
  thread_local std::map<std::int64_t, std::unique_ptr<CosinePair>> cache;
  auto& slot = cache[m];
  if (!slot) slot = std::make_unique<CosinePair>(static_cast<int>(m));
  return *slot;
}

// phi += A^{-1} r on the mean-zero subspace.
void apply_inverse(std::int64_t m, double h, std::span<const double> r,
                   std::vector<double>& phi) {
  CosinePair& dct = cosine_pair(m);
  double* b = dct.data();
  std::copy(r.begin(), r.end(), b);
  dct.forward();
  std::vector<double> lam(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(k) /
                              (2.0 * static_cast<double>(m)));
    lam[static_cast<std::size_t>(k)] = 4.0 * s * s / (h * h);
  }
  const double norm = 4.0 * static_cast<double>(m) * static_cast<double>(m);
  for (std::int64_t l = 0; l < m; ++l) {
    for (std::int64_t k = 0; k < m; ++k) {
      const std::size_t c = static_cast<std::size_t>(l * m + k);
      const double e = lam[static_cast<std::size_t>(k)] + lam[static_cast<std::size_t>(l)];
      b[c] = (k == 0 && l == 0) ? 0.0 : b[c] / (e * norm);
    }
  }
  dct.inverse();
  for (std::size_t c = 0; c < phi.size(); ++c) phi[c] += b[c];
}

void face_gradients(NeumannSolution& s) {
  const std::int64_t m = s.m;
  const auto at = [&](std::int64_t i, std::int64_t j) {
    return s.phi[static_cast<std::size_t>(j * m + i)];
  };
  s.gx.assign(static_cast<std::size_t>((m + 1) * m), 0.0);
  s.gy.assign(static_cast<std::size_t>(m * (m + 1)), 0.0);
  for (std::int64_t j = 0; j < m; ++j) {
    for (std::int64_t i = 1; i < m; ++i) {
      s.gx[static_cast<std::size_t>(j * (m + 1) + i)] = (at(i, j) - at(i - 1, j)) / s.h;
    }
  }
  for (std::int64_t j = 1; j < m; ++j) {
    for (std::int64_t i = 0; i < m; ++i) {
      s.gy[static_cast<std::size_t>(j * m + i)] = (at(i, j) - at(i, j - 1)) / s.h;
    }
  }
}

// f - (-lap_h phi), with -lap_h phi = -div of the face gradients.
std::vector<double> residual(const NeumannSolution& s, std::span<const double> f) {
  const std::int64_t m = s.m;
  std::vector<double> r(f.begin(), f.end());
  for (std::int64_t j = 0; j < m; ++j) {
    for (std::int64_t i = 0; i < m; ++i) {
      const double div = (s.gx[static_cast<std::size_t>(j * (m + 1) + i + 1)] -
                          s.gx[static_cast<std::size_t>(j * (m + 1) + i)] +
                          s.gy[static_cast<std::size_t>((j + 1) * m + i)] -
                          s.gy[static_cast<std::size_t>(j * m + i)]) /
                         s.h;
      r[static_cast<std::size_t>(j * m + i)] += div;
    }
  }
  return r;
}

double max_abs(std::span<const double> v) {
  double a = 0.0;
  for (double x : v) a = std::max(a, std::abs(x));
  return a;
}

}  // namespace

std::array<double, 2> NeumannSolution::centred_gradient(std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0 || i >= m || j >= m) {
    throw std::out_of_range("centred_gradient: cell outside the grid");
  }
  const double x = 0.5 * (gx[static_cast<std::size_t>(j * (m + 1) + i)] +
                          gx[static_cast<std::size_t>(j * (m + 1) + i + 1)]);
  const double y =
      0.5 * (gy[static_cast<std::size_t>(j * m + i)] + gy[static_cast<std::size_t>((j + 1) * m + i)]);
  return {x, y};
}

double NeumannSolution::energy() const {
  // Each interior face is shared by two cells, each contributing half its
  // square times h^2 / 2; boundary faces carry zero.
  double sum = 0.0;
  for (double g : gx) sum += g * g;
  for (double g : gy) sum += g * g;
  return sum * h * h;
}

NeumannSolution solve_neumann(std::int64_t m, double h, std::span<const double> f) {
  if (m < 1 || !(h > 0.0)) throw std::invalid_argument("solve_neumann: empty grid");
  if (f.size() != static_cast<std::size_t>(m * m)) {
    throw std::invalid_argument("solve_neumann: rhs size must be m*m");
  }
  const double scale = max_abs(f);
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  if (std::abs(mean) > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("solve_neumann: rhs must have zero mean");
  }
  std::vector<double> rhs(f.begin(), f.end());
  for (double& v : rhs) v -= mean;

  NeumannSolution s;
  s.m = m;
  s.h = h;
  s.phi.assign(rhs.size(), 0.0);
  if (scale == 0.0) {
    face_gradients(s);
    return s;
  }
  std::vector<double> r = rhs;
  for (int pass = 0; pass < 4; ++pass) {
    apply_inverse(m, h, r, s.phi);
    face_gradients(s);
    r = residual(s, rhs);
    // The residual is orthogonal to constants only up to rounding.
    double rm = 0.0;
    for (double v : r) rm += v;
    rm /= static_cast<double>(r.size());
    for (double& v : r) v -= rm;
    s.residual = max_abs(r) / scale;
    if (s.residual <= 1e-10) break;
  }
  double pm = 0.0;
  for (double v : s.phi) pm += v;
  pm /= static_cast<double>(s.phi.size());
  for (double& v : s.phi) v -= pm;
  if (s.residual > 1e-10) throw std::runtime_error("solve_neumann: residual did not converge");
  return s;
}

CellProblem CellProblem::from_tree(const DyadicTree& tree, const DyadicCube& Q, double h) {
  if (!Q.has_children()) throw std::invalid_argument("CellProblem: cube of side 1");
  CellProblem cp;
  cp.cube = Q;
  cp.h = h;
  cp.parent_density = tree.density(Q);
  const auto kids = Q.children();
  for (std::size_t k = 0; k < 4; ++k) cp.child_density[k] = tree.density(kids[k]);
  return cp;
}

std::vector<double> CellProblem::rhs() const {
  const double half = 0.5 * static_cast<double>(cube.side);
  const double cells = half / h;
  if (!(h > 0.0) || cells < 1.0 || cells != std::floor(cells)) {
    throw std::invalid_argument("CellProblem: h must divide half the side");
  }
  const std::int64_t mh = static_cast<std::int64_t>(cells);
  const std::int64_t m = 2 * mh;
  std::vector<double> f(static_cast<std::size_t>(m * m));
  for (std::int64_t j = 0; j < m; ++j) {
    for (std::int64_t i = 0; i < m; ++i) {
      const std::size_t q = static_cast<std::size_t>((j >= mh ? 2 : 0) + (i >= mh ? 1 : 0));
      f[static_cast<std::size_t>(j * m + i)] = parent_density - child_density[q];
    }
  }
  return f;
}

NeumannSolution solve_cell(const CellProblem& cp) {
  const std::vector<double> f = cp.rhs();
  const std::int64_t m = static_cast<std::int64_t>(std::llround(std::sqrt(f.size())));
  return solve_neumann(m, cp.h, f);
}

}  // namespace dyadot
