#include "dyadot/flux.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dyadot/grid_io.hpp"
#include "json.hpp"

namespace dyadot {

namespace {

std::int64_t cells_for(double length, double h, const char* what) {
  const double c = length / h;
  if (!(h > 0.0) || c < 1.0 || c != std::floor(c)) {
    throw std::invalid_argument(std::string(what) + ": h must divide the side");
  }
  return static_cast<std::int64_t>(c);
}

}  // namespace

FluxField::FluxField(double R, double h) : R_(R), h_(h), m_(cells_for(R, h, "FluxField")) {
  jx_.assign(static_cast<std::size_t>((m_ + 1) * m_), 0.0);
  jy_.assign(static_cast<std::size_t>(m_ * (m_ + 1)), 0.0);
}

FluxField FluxField::sample(double R, double h,
                            const std::function<std::array<double, 2>(double, double)>& j) {
  FluxField f(R, h);
  const std::int64_t m = f.m_;
  for (std::int64_t b = 0; b < m; ++b) {
    for (std::int64_t a = 0; a <= m; ++a) {
      f.jx_[static_cast<std::size_t>(b * (m + 1) + a)] =
          j(static_cast<double>(a) * h, (static_cast<double>(b) + 0.5) * h)[0];
    }
  }
  for (std::int64_t b = 0; b <= m; ++b) {
    for (std::int64_t a = 0; a < m; ++a) {
      f.jy_[static_cast<std::size_t>(b * m + a)] =
          j((static_cast<double>(a) + 0.5) * h, static_cast<double>(b) * h)[1];
    }
  }
  return f;
}

std::vector<double> FluxField::divergence() const {
  std::vector<double> div(static_cast<std::size_t>(m_ * m_));
  for (std::int64_t j = 0; j < m_; ++j) {
    for (std::int64_t i = 0; i < m_; ++i) {
      div[static_cast<std::size_t>(j * m_ + i)] =
          (jx_[static_cast<std::size_t>(j * (m_ + 1) + i + 1)] -
           jx_[static_cast<std::size_t>(j * (m_ + 1) + i)] +
           jy_[static_cast<std::size_t>((j + 1) * m_ + i)] -
           jy_[static_cast<std::size_t>(j * m_ + i)]) /
          h_;
    }
  }
  return div;
}

double FluxField::boundary_normal_max() const {
  double b = 0.0;
  for (std::int64_t j = 0; j < m_; ++j) {
    b = std::max({b, std::abs(jx_[static_cast<std::size_t>(j * (m_ + 1))]),
                  std::abs(jx_[static_cast<std::size_t>(j * (m_ + 1) + m_)])});
  }
  for (std::int64_t i = 0; i < m_; ++i) {
    b = std::max({b, std::abs(jy_[static_cast<std::size_t>(i)]),
                  std::abs(jy_[static_cast<std::size_t>(m_ * m_ + i)])});
  }
  return b;
}

std::vector<double> FluxField::node_samples() const {
  const std::int64_t n = m_ + 1;
  std::vector<double> out(static_cast<std::size_t>(n * n * 2));
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t a = 0; a < n; ++a) {
      double sx = 0.0;
      int cx = 0;
      for (std::int64_t row : {b - 1, b}) {
        if (row < 0 || row >= m_) continue;
        sx += jx_[static_cast<std::size_t>(row * (m_ + 1) + a)];
        ++cx;
      }
      double sy = 0.0;
      int cy = 0;
      for (std::int64_t col : {a - 1, a}) {
        if (col < 0 || col >= m_) continue;
        sy += jy_[static_cast<std::size_t>(b * m_ + col)];
        ++cy;
      }
      const std::size_t k = static_cast<std::size_t>(2 * (b * n + a));
      out[k] = sx / cx;
      out[k + 1] = sy / cy;
    }
  }
  return out;
}

void FluxField::write(const std::filesystem::path& stem) const {
  GridHeader header;
  header.R = R_;
  header.h = h_;
  header.nx = m_ + 1;
  header.ny = m_ + 1;
  header.components = 2;
  header.field = "flux";
  write_grid(stem, header, node_samples());
}

FluxField assemble_flux(const PointSet& ps, const StoppedPartition& partition, double h) {
  if (partition.overflow) {
    throw std::invalid_argument("assemble_flux: partition overflows; use the brutal bound");
  }
  const DyadicTree tree(ps);
  if (tree.R() != partition.R) throw std::invalid_argument("assemble_flux: root mismatch");
  cells_for(0.5, h, "assemble_flux");
  FluxField f(static_cast<double>(partition.R), h);

  // Strict ancestors of partition cubes, found by descending until a
  // partition cube is hit.
  const std::set<DyadicCube> leaves(partition.cubes.begin(), partition.cubes.end());
  std::vector<DyadicCube> stack{DyadicCube::root(partition.R)};
  std::vector<DyadicCube> internal;
  while (!stack.empty()) {
    const DyadicCube Q = stack.back();
    stack.pop_back();
    if (leaves.count(Q) != 0) continue;
    if (!Q.has_children()) throw std::logic_error("assemble_flux: partition does not cover");
    internal.push_back(Q);
    for (const auto& c : Q.children()) stack.push_back(c);
  }
  std::sort(internal.begin(), internal.end());

  const std::int64_t m = f.cells();
  auto& jx = f.jx();
  auto& jy = f.jy();
  for (const DyadicCube& Q : internal) {
    const NeumannSolution s = solve_cell(CellProblem::from_tree(tree, Q, h));
    const std::int64_t mq = s.m;
    const std::int64_t ox = Q.i * mq;
    const std::int64_t oy = Q.j * mq;
    for (std::int64_t j = 0; j < mq; ++j) {
      for (std::int64_t i = 1; i < mq; ++i) {
        jx[static_cast<std::size_t>((oy + j) * (m + 1) + ox + i)] -=
            s.gx[static_cast<std::size_t>(j * (mq + 1) + i)];
      }
    }
    for (std::int64_t j = 1; j < mq; ++j) {
      for (std::int64_t i = 0; i < mq; ++i) {
        jy[static_cast<std::size_t>((oy + j) * m + ox + i)] -=
            s.gy[static_cast<std::size_t>(j * mq + i)];
      }
    }
  }
  f.contributors() = std::move(internal);
  return f;
}

double flux_energy(const FluxField& f) {
  // Interior faces are shared by two cells, each weighing h^2/2.
  double sum = 0.0;
  for (double v : f.jx()) sum += v * v;
  for (double v : f.jy()) sum += v * v;
  const std::int64_t m = f.cells();
  // Boundary faces belong to one cell only.
  double edge = 0.0;
  for (std::int64_t j = 0; j < m; ++j) {
    const double a = f.jx()[static_cast<std::size_t>(j * (m + 1))];
    const double b = f.jx()[static_cast<std::size_t>(j * (m + 1) + m)];
    edge += a * a + b * b;
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const double a = f.jy()[static_cast<std::size_t>(i)];
    const double b = f.jy()[static_cast<std::size_t>(m * m + i)];
    edge += a * a + b * b;
  }
  return (sum - 0.5 * edge) * f.h() * f.h();
}

double divergence_mismatch(const FluxField& f, const PointSet& ps,
                           const StoppedPartition& partition) {
  const DyadicTree tree(ps);
  const std::int64_t m = f.cells();
  const double h = f.h();
  const double n = tree.density(DyadicCube::root(tree.R()));
  std::vector<double> target(static_cast<std::size_t>(m * m), n);
  for (const DyadicCube& Q : partition.cubes) {
    const double lambda = tree.density(Q);
    const std::int64_t mq = cells_for(static_cast<double>(Q.side), h, "divergence_mismatch");
    for (std::int64_t j = Q.j * mq; j < (Q.j + 1) * mq; ++j) {
      for (std::int64_t i = Q.i * mq; i < (Q.i + 1) * mq; ++i) {
        target[static_cast<std::size_t>(j * m + i)] = n - lambda;
      }
    }
  }
  const std::vector<double> div = f.divergence();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < div.size(); ++c) {
    num += (div[c] - target[c]) * (div[c] - target[c]);
    den += target[c] * target[c];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num) * h;
}

std::string UpperBoundReport::to_json() const {
  nlohmann::json j;
  j["R"] = R;
  j["count"] = count;
  j["density"] = density;
  j["coarse"] = coarse;
  j["flux_energy"] = flux_energy;
  j["flux"] = flux;
  j["min_density"] = min_density;
  j["brutal"] = brutal;
  j["brutal_reason"] = brutal_reason;
  j["total"] = total;
  j["partition_cubes"] = partition_cubes;
  j["flux_cubes"] = flux_cubes;
  return j.dump();
}

UpperBoundReport upper_bound(const PointSet& ps, double h) {
  const DyadicTree tree(ps);
  UpperBoundReport rep;
  rep.R = tree.R();
  rep.count = ps.size();
  const double R = static_cast<double>(rep.R);
  rep.density = static_cast<double>(rep.count) / (R * R);
  const auto brutal = [&](std::string why) {
    rep.brutal = true;
    rep.brutal_reason = std::move(why);
    rep.total = static_cast<double>(rep.count) * 2.0 * R * R;
    return rep;
  };

  const StoppedPartition part = build_partition(tree);
  if (part.overflow) return brutal("root density outside [1/2, 2]");
  rep.partition_cubes = part.cubes.size();
  rep.min_density = rep.density;
  for (const DyadicCube& Q : part.cubes) {
    const double s = static_cast<double>(Q.side);
    rep.coarse += 2.0 * s * s * static_cast<double>(tree.count(Q));
    rep.min_density = std::min(rep.min_density, tree.density(Q));
  }
  if (rep.min_density < 0.5) return brutal("density below 1/2");

  const FluxField f = assemble_flux(ps, part, h);
  rep.flux_cubes = f.contributors().size();
  rep.flux_energy = flux_energy(f);
  rep.flux = 2.0 * rep.flux_energy;
  rep.total = rep.coarse + rep.flux + 2.0 * std::sqrt(rep.coarse * rep.flux);
  return rep;
}

MomentEstimate cell_energy_moment(std::int64_t side, std::int64_t replicates, RngStream& rng,
                                  double intensity, double h) {
  if (replicates < 1) throw std::invalid_argument("cell_energy_moment: replicates >= 1");
  if (side < 2 || !is_power_of_two(side)) {
    throw std::invalid_argument("cell_energy_moment: side must be a power of two >= 2");
  }
  MomentEstimate est;
  est.replicates = replicates;
  double sum = 0.0;
  double sum_sq = 0.0;
  const Box box = Box::square(static_cast<double>(side));
  for (std::int64_t k = 0; k < replicates; ++k) {
    RngStream stream = rng.split("replicate-" + std::to_string(k));
    const PointSet ps = sample_poisson(box, intensity, stream);
    const DyadicTree tree(ps);
    const double e =
        solve_cell(CellProblem::from_tree(tree, DyadicCube::root(side), h)).energy();
    sum += e;
    sum_sq += e * e;
  }
  const double n = static_cast<double>(replicates);
  est.mean = sum / n;
  if (replicates > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

}  // namespace dyadot
