#include "dyadot/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dyadot/assignment.hpp"
#include "dyadot/cost_report.hpp"
#include "dyadot/dyadic.hpp"
#include "dyadot/errors.hpp"
#include "dyadot/flux.hpp"
#include "dyadot/neumann.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/semidiscrete.hpp"
#include "dyadot/witness.hpp"

namespace dyadot {

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::kMatchCost, "match_cost"},   {ExperimentKind::kW2Lebesgue, "w2_lebesgue"},
    {ExperimentKind::kWitnessLower, "witness_lower"}, {ExperimentKind::kFluxUpper, "flux_upper"},
    {ExperimentKind::kSandwich, "sandwich"},      {ExperimentKind::kMoments, "moments"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not a number: " + v);
  return d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not an integer: " + v);
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v.empty()) return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument(key + ": not a boolean: " + v);
}

// Mean density of a point set over its own box.
double mean_density(const PointSet& ps) {
  return static_cast<double>(ps.size()) / ps.box().area();
}

struct Replicate {
  PointSet mu;
  PointSet nu;
};

Replicate draw(const ExperimentConfig& c, std::int64_t R, std::int64_t seed, double side) {
  const RngStream base = replicate_stream(c.master_seed, R, seed);
  RngStream mu_rng = base.split("mu");
  RngStream nu_rng = base.split("nu");
  const Box box = Box::square(side);
  Replicate r;
  r.mu = sample_poisson(box, c.intensity, mu_rng);
  r.nu = sample_uniform_n(box, static_cast<std::int64_t>(r.mu.size()), nu_rng);
  return r;
}

void match_cost(const ExperimentConfig& c, ScalingRecord& rec) {
  const double R = static_cast<double>(rec.R);
  const Replicate rep = draw(c, rec.R, rec.seed, 2.0 * R);
  rec.aux["count"] = static_cast<double>(rep.mu.size());
  if (rep.mu.empty()) {
    rec.flagged = true;
    return;
  }
  const MatchingPlan plan = solve_assignment(rep.mu, rep.nu, 2);
  const CostReport cr = compute_cost_report(rep.mu, rep.nu, plan, R, c.h);
  rec.value = cr.E_R;
  rec.aux["cost"] = plan.cost;
  rec.aux["D_R"] = cr.D_R;
  rec.aux["w2_mu"] = cr.w2_mu;
  rec.aux["dens_mu"] = cr.dens_mu;
  rec.aux["w2_nu"] = cr.w2_nu;
  rec.aux["dens_nu"] = cr.dens_nu;
  rec.aux["n_mu"] = cr.n_mu;
  rec.aux["n_nu"] = cr.n_nu;
  rec.aux["infinite"] = cr.infinite ? 1.0 : 0.0;
  rec.flagged = cr.infinite;
}

void w2_lebesgue(const ExperimentConfig& c, ScalingRecord& rec) {
  const double R = static_cast<double>(rec.R);
  const Replicate rep = draw(c, rec.R, rec.seed, R);
  rec.aux["count"] = static_cast<double>(rep.mu.size());
  if (rep.mu.empty()) {
    rec.flagged = true;
    return;
  }
  const SemidiscreteResult sd = semidiscrete_w2(rep.mu, rep.mu.box(), mean_density(rep.mu), c.h);
  rec.value = sd.value / (R * R);
  rec.aux["w2"] = sd.value;
  rec.aux["discretization_radius"] = sd.discretization_radius;
}

void witness_lower(const ExperimentConfig& c, ScalingRecord& rec) {
  const Replicate rep = draw(c, rec.R, rec.seed, static_cast<double>(rec.R));
  const WitnessField w = build_witness(rep.mu, rec.R, c.M, c.h);
  const WitnessValue v = witness_value(w, rep.mu, rep.nu);
  rec.value = v.normalized;
  rec.aux["count"] = static_cast<double>(rep.mu.size());
  rec.aux["raw"] = v.raw;
  rec.aux["lipschitz"] = v.lipschitz;
  rec.aux["exceptional_area"] = w.exceptional_area();
  rec.aux["root_rejected"] = w.root_rejected() ? 1.0 : 0.0;
  rec.aux["family"] = static_cast<double>(w.family().size());
  rec.aux["integral"] = w.integral();
  rec.aux["boundary_max"] = w.boundary_max();
  rec.aux["grid_gradient_max"] = w.grid_gradient_max();
  rec.aux["exact_p1"] = rep.mu.empty() ? 0.0 : solve_assignment(rep.mu, rep.nu, 1).cost;
}

void flux_upper(const ExperimentConfig& c, ScalingRecord& rec) {
  const double R = static_cast<double>(rec.R);
  const Replicate rep = draw(c, rec.R, rec.seed, R);
  const UpperBoundReport ub = upper_bound(rep.mu, c.h);
  rec.value = ub.total / (R * R);
  rec.flagged = ub.brutal;
  rec.aux["count"] = static_cast<double>(ub.count);
  rec.aux["coarse"] = ub.coarse;
  rec.aux["flux"] = ub.flux;
  rec.aux["flux_energy"] = ub.flux_energy;
  rec.aux["brutal"] = ub.brutal ? 1.0 : 0.0;
  rec.aux["total"] = ub.total;
  rec.aux["min_density"] = ub.min_density;
}

void sandwich(const ExperimentConfig& c, ScalingRecord& rec) {
  const Replicate rep = draw(c, rec.R, rec.seed, static_cast<double>(rec.R));
  rec.aux["count"] = static_cast<double>(rep.mu.size());
  if (rep.mu.empty()) {
    rec.flagged = true;
    return;
  }
  const WitnessField w = build_witness(rep.mu, rec.R, c.M, c.h);
  const double lower = witness_value(w, rep.mu, rep.nu).normalized;
  const double exact_p1 = solve_assignment(rep.mu, rep.nu, 1).cost;
  const double w2 =
      semidiscrete_w2(rep.mu, rep.mu.box(), mean_density(rep.mu), c.h).value;
  const UpperBoundReport ub = upper_bound(rep.mu, c.h);
  rec.value = w2;
  rec.aux["lower"] = lower;
  rec.aux["exact_p1"] = exact_p1;
  rec.aux["upper"] = ub.total;
  rec.aux["brutal"] = ub.brutal ? 1.0 : 0.0;
  const double tol = 1e-9 * std::max(1.0, exact_p1);
  const bool bad = lower > exact_p1 + tol || w2 > ub.total * (1.0 + 1e-9);
  rec.aux["violation"] = bad ? 1.0 : 0.0;
}

void moments(const ExperimentConfig& c, ScalingRecord& rec) {
  const double R = static_cast<double>(rec.R);
  const Replicate rep = draw(c, rec.R, rec.seed, R);
  const DyadicTree tree(rep.mu);
  const StoppingScale s = stopping_scale(tree, rep.mu.box().center());
  rec.value = std::pow(s.r_star, 4);
  rec.aux["exceeds_root"] = s.exceeds_root ? 1.0 : 0.0;
  const DyadicCube root = DyadicCube::root(rec.R);
  const double N = static_cast<double>(tree.signed_count(root));
  rec.aux["N_sq_over_area"] = N * N / (R * R);
  rec.aux["cell_energy_over_area"] =
      solve_cell(CellProblem::from_tree(tree, root, c.h)).energy() / (R * R);
}

}  // namespace

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKinds) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

const char* kind_name(ExperimentKind k) {
  for (const auto& [kk, n] : kKinds) {
    if (kk == k) return n;
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (R.empty()) throw std::invalid_argument("config: R list is empty");
  for (std::int64_t r : R) {
    if (r < 4 || !is_power_of_two(r)) {
      throw std::invalid_argument("config: R values must be powers of two >= 4");
    }
  }
  if (seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
  if (!(intensity > 0.0)) throw std::invalid_argument("config: intensity must be > 0");
  if (!(M > 0.0)) throw std::invalid_argument("config: M must be > 0");
  const bool transport_only = kind == ExperimentKind::kW2Lebesgue || kind == ExperimentKind::kMatchCost;
  if (transport_only) {
    if (!(h > 0.0) || h > 1.0 || 1.0 / h != std::floor(1.0 / h)) {
      throw std::invalid_argument("config: grid-h must divide 1");
    }
  } else if (!(h > 0.0) || h > 0.25 || 0.5 / h != std::floor(0.5 / h)) {
    throw std::invalid_argument("config: grid-h must divide 1/2 and be <= 1/4");
  }
}

std::vector<std::int64_t> parse_r_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_int("R", item));
  }
  if (out.empty()) throw std::invalid_argument("R: empty list");
  return out;
}

void apply_setting(ExperimentConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "kind") {
    c.kind = parse_kind(v);
  } else if (key == "R") {
    c.R = parse_r_list(v);
  } else if (key == "seeds") {
    c.seeds = to_int(key, v);
  } else if (key == "seed") {
    const std::int64_t s = to_int(key, v);
    if (s < 0) throw std::invalid_argument("seed must be >= 0");
    c.master_seed = static_cast<std::uint64_t>(s);
  } else if (key == "intensity") {
    c.intensity = to_double(key, v);
  } else if (key == "M") {
    c.M = to_double(key, v);
  } else if (key == "grid-h" || key == "grid_h") {
    c.h = to_double(key, v);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "format") {
    c.format = parse_format(v);
  } else if (key == "force") {
    c.force = to_bool(key, v);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void apply_config_text(ExperimentConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(ExperimentConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str());
}

std::vector<ScalingRecord> run(const ExperimentConfig& config, const RecordCallback& progress) {
  config.validate();
  std::vector<std::int64_t> Rs = config.R;
  std::sort(Rs.begin(), Rs.end());
  Rs.erase(std::unique(Rs.begin(), Rs.end()), Rs.end());
  std::vector<ScalingRecord> out;
  for (std::int64_t R : Rs) {
    for (std::int64_t seed = 0; seed < config.seeds; ++seed) {
      ScalingRecord rec;
      rec.kind = kind_name(config.kind);
      rec.R = R;
      rec.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      switch (config.kind) {
        case ExperimentKind::kMatchCost: match_cost(config, rec); break;
        case ExperimentKind::kW2Lebesgue: w2_lebesgue(config, rec); break;
        case ExperimentKind::kWitnessLower: witness_lower(config, rec); break;
        case ExperimentKind::kFluxUpper: flux_upper(config, rec); break;
        case ExperimentKind::kSandwich: sandwich(config, rec); break;
        case ExperimentKind::kMoments: moments(config, rec); break;
      }
      rec.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (progress) progress(rec);
      out.push_back(std::move(rec));
    }
  }
  std::sort(out.begin(), out.end(), [](const ScalingRecord& a, const ScalingRecord& b) {
    return std::tie(a.kind, a.R, a.seed) < std::tie(b.kind, b.R, b.seed);
  });
  return out;
}

namespace {

struct Group {
  std::int64_t n = 0;
  std::int64_t flagged = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double stderr_() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                         static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

std::map<std::pair<std::string, std::int64_t>, Group> group(
    const std::vector<ScalingRecord>& records) {
  std::map<std::pair<std::string, std::int64_t>, Group> g;
  for (const auto& r : records) {
    Group& x = g[{r.kind, r.R}];
    if (r.flagged || !std::isfinite(r.value)) {
      ++x.flagged;
      continue;
    }
    ++x.n;
    x.sum += r.value;
    x.sum_sq += r.value * r.value;
  }
  return g;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string report(const std::vector<ScalingRecord>& records, const std::optional<FitResult>& fit,
                   const ReportThresholds& thresholds) {
  std::string s;
  if (records.empty()) s += "warning: no records\n";
  s += kReportHeader;
  s += '\n';
  for (const auto& [key, g] : group(records)) {
    s += key.first + "\t" + std::to_string(key.second) + "\t" + std::to_string(g.n) + "\t" +
         std::to_string(g.flagged) + "\t" + fmt("%.6g", g.mean()) + "\t" +
         fmt("%.3g", g.stderr_()) + "\n";
  }
  if (fit) {
    const char* x = fit->model == FitModel::kLog ? "ln R" : "sqrt(ln R)";
    s += "fit: value = a + b " + std::string(x) + "\n";
    s += "  a = " + fmt("%.6g", fit->a) + " +- " + fmt("%.3g", fit->a_stderr) + "\n";
    s += "  b = " + fmt("%.6g", fit->b) + " +- " + fmt("%.3g", fit->b_stderr) + "\n";
    s += "  b/stderr = " + fmt("%.3g", fit->t_ratio()) + ", R^2 = " +
         fmt("%.4f", fit->r_squared) + "\n";
    const bool slope_ok = fit->b > 0.0 && fit->t_ratio() > thresholds.min_t_ratio;
    s += "slope b > 0 and b/stderr > " + fmt("%g", thresholds.min_t_ratio) + ": " +
         (slope_ok ? "PASS" : "FAIL") + "\n";
    if (thresholds.min_r_squared) {
      const bool r2_ok = fit->r_squared > *thresholds.min_r_squared;
      s += "R^2 > " + fmt("%g", *thresholds.min_r_squared) + ": " + (r2_ok ? "PASS" : "FAIL") +
           "\n";
    }
  }
  return s;
}

void write_summary_csv(const std::vector<ScalingRecord>& records,
                       const std::filesystem::path& path, bool force) {
  if (std::filesystem::exists(path) && !force) {
    throw IoError("refusing to overwrite " + path.string() + " (use --force)");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "kind,R,seeds,flagged,mean,stderr\n";
  for (const auto& [key, g] : group(records)) {
    out << key.first << ',' << key.second << ',' << g.n << ',' << g.flagged << ','
        << fmt("%.17g", g.mean()) << ',' << fmt("%.17g", g.stderr_()) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dyadot
