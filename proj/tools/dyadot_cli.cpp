// dyadot: sampling, exact matching, witness and flux bounds, scaling sweeps.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "dyadot/assignment.hpp"
#include "dyadot/errors.hpp"
#include "dyadot/experiments.hpp"
#include "dyadot/flux.hpp"
#include "dyadot/grid_io.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/semidiscrete.hpp"
#include "dyadot/witness.hpp"
#include "json.hpp"

namespace {

using namespace dyadot;

enum Exit { kOk = 0, kUsage = 1, kInvariant = 2, kIo = 3 };

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string R;
  std::int64_t seeds = 0;
  std::int64_t seed = 0;
  double intensity = 0.0;
  double M = 0.0;
  double h = 0.0;
  std::string out;
  std::string format;
  bool force = false;
  std::string config;
  // Subcommand specific.
  std::string kind;
  std::string model = "auto";
  std::string input;
  int p = 2;
  std::int64_t replicate = 0;
  bool timings = false;
};

// Config file first, then every flag given on the command line.
ExperimentConfig resolve(const CLI::App& app, const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) apply_config_file(c, f.config);
  const auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--R")) c.R = parse_r_list(f.R);
  if (given("--seeds")) c.seeds = f.seeds;
  if (given("--seed")) apply_setting(c, "seed", std::to_string(f.seed));
  if (given("--intensity")) c.intensity = f.intensity;
  if (given("--M")) c.M = f.M;
  if (given("--grid-h")) c.h = f.h;
  if (given("--out")) c.out = f.out;
  if (given("--format")) c.format = parse_format(f.format);
  if (given("--force")) c.force = f.force;
  return c;
}

std::int64_t single_R(const ExperimentConfig& c) {
  if (c.R.size() != 1) throw std::invalid_argument("this command takes a single --R");
  return c.R.front();
}

struct Pair {
  PointSet mu;
  PointSet nu;
};

Pair draw_pair(const ExperimentConfig& c, std::int64_t R, std::int64_t replicate) {
  const RngStream base = replicate_stream(c.master_seed, R, replicate);
  RngStream a = base.split("mu");
  RngStream b = base.split("nu");
  const Box box = Box::square(static_cast<double>(R));
  Pair p;
  p.mu = sample_poisson(box, c.intensity, a);
  p.nu = sample_uniform_n(box, static_cast<std::int64_t>(p.mu.size()), b);
  return p;
}

void guard_overwrite(const std::filesystem::path& p, bool force) {
  if (std::filesystem::exists(p) && !force) {
    throw IoError("refusing to overwrite " + p.string() + " (use --force)");
  }
}

int cmd_sample(const ExperimentConfig& c, const Flags& f) {
  const std::int64_t R = single_R(c);
  const Pair p = draw_pair(c, R, f.replicate);
  if (c.out.empty()) {
    std::cout << metadata_json(p.mu) << '\n';
    return kOk;
  }
  std::filesystem::path csv = c.out;
  std::filesystem::path meta = csv;
  meta.replace_extension(".json");
  guard_overwrite(csv, c.force);
  guard_overwrite(meta, c.force);
  write_points_csv(p.mu, csv);
  write_metadata_json(p.mu, meta);
  std::cout << "wrote " << p.mu.size() << " points to " << csv.string() << '\n';
  return kOk;
}

int cmd_match(const ExperimentConfig& c, const Flags& f) {
  const std::int64_t R = single_R(c);
  const Pair p = draw_pair(c, R, f.replicate);
  const MatchingPlan plan = solve_assignment(p.mu, p.nu, f.p);
  if (!c.out.empty()) {
    guard_overwrite(c.out, c.force);
    write_matching_csv(plan, p.mu.points(), p.nu.points(), c.out);
  }
  nlohmann::json j;
  j["R"] = R;
  j["n"] = p.mu.size();
  j["p"] = f.p;
  j["cost"] = plan.cost;
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_w2(const ExperimentConfig& c, const Flags& f) {
  const std::int64_t R = single_R(c);
  const Pair p = draw_pair(c, R, f.replicate);
  nlohmann::json j;
  j["R"] = R;
  j["n"] = p.mu.size();
  if (p.mu.empty()) {
    j["value"] = 0.0;
    j["empty_warning"] = true;
  } else {
    const double n = static_cast<double>(p.mu.size()) / static_cast<double>(R * R);
    const SemidiscreteResult r = semidiscrete_w2(p.mu, p.mu.box(), n, c.h);
    j["value"] = r.value;
    j["value_over_R2"] = r.value / static_cast<double>(R * R);
    j["discretization_radius"] = r.discretization_radius;
    j["empty_warning"] = false;
  }
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_witness(const ExperimentConfig& c, const Flags& f) {
  const std::int64_t R = single_R(c);
  const Pair p = draw_pair(c, R, f.replicate);
  const WitnessField w = build_witness(p.mu, R, c.M, c.h);
  const WitnessValue v = witness_value(w, p.mu, p.nu);
  if (!c.out.empty()) {
    std::filesystem::path stem = c.out;
    std::filesystem::path family = stem;
    family += ".family.jsonl";
    guard_overwrite(family, c.force);
    std::ofstream out(family);
    if (!out) throw IoError("cannot open " + family.string());
    w.write_jsonl(out);
    GridHeader g;
    g.R = static_cast<double>(R);
    g.h = c.h;
    g.nx = g.ny = w.nodes_per_side();
    g.field = "zeta";
    write_grid(stem, g, w.zeta_samples());
  }
  nlohmann::json j;
  j["R"] = R;
  j["M"] = c.M;
  j["n"] = p.mu.size();
  j["raw"] = v.raw;
  j["lipschitz"] = v.lipschitz;
  j["normalized"] = v.normalized;
  j["family"] = w.family().size();
  j["root_rejected"] = w.root_rejected();
  j["exceptional_area"] = w.exceptional_area();
  j["integral"] = w.integral();
  j["boundary_max"] = w.boundary_max();
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_flux(const ExperimentConfig& c, const Flags& f) {
  const std::int64_t R = single_R(c);
  const Pair p = draw_pair(c, R, f.replicate);
  const UpperBoundReport rep = upper_bound(p.mu, c.h);
  if (!c.out.empty() && !rep.brutal) {
    std::filesystem::path bin = c.out;
    bin += ".bin";
    guard_overwrite(bin, c.force);
    const StoppedPartition part = build_partition(p.mu);
    assemble_flux(p.mu, part, c.h).write(c.out);
  }
  std::cout << rep.to_json() << '\n';
  return kOk;
}

void emit(const std::vector<ScalingRecord>& records, const ExperimentConfig& c, const Flags& f) {
  if (c.out.empty()) return;
  RecordWriteOptions o;
  o.format = c.format;
  o.force = c.force;
  o.wall_time = f.timings;
  write_records(records, c.out, o);
}

std::optional<FitResult> maybe_fit(const std::vector<ScalingRecord>& records,
                                   const std::string& model, const std::string& kind) {
  std::set<std::int64_t> Rs;
  for (const auto& r : records) {
    if (!r.flagged) Rs.insert(r.R);
  }
  if (Rs.size() < 3) return std::nullopt;
  FitModel m = FitModel::kLog;
  if (model == "auto") {
    m = kind == "witness_lower" ? FitModel::kSqrtLog : FitModel::kLog;
  } else {
    m = parse_model(model);
  }
  return fit(records, m);
}

int cmd_scaling(ExperimentConfig c, const Flags& f) {
  if (!f.kind.empty()) c.kind = parse_kind(f.kind);
  if (!c.out.empty()) guard_overwrite(c.out, c.force);
  const auto records = run(c, [](const ScalingRecord& r) {
    std::fprintf(stderr, "%s R=%lld seed=%lld value=%.6g (%.2fs)\n", r.kind.c_str(),
                 static_cast<long long>(r.R), static_cast<long long>(r.seed), r.value,
                 r.wall_time);
  });
  emit(records, c, f);
  std::cout << report(records, maybe_fit(records, f.model, kind_name(c.kind)));
  return kOk;
}

int cmd_sandwich(ExperimentConfig c, const Flags& f) {
  c.kind = ExperimentKind::kSandwich;
  if (!c.out.empty()) guard_overwrite(c.out, c.force);
  const auto records = run(c);
  emit(records, c, f);
  std::int64_t bad = 0;
  for (const auto& r : records) {
    const auto it = r.aux.find("violation");
    const bool v = it != r.aux.end() && it->second != 0.0;
    bad += v ? 1 : 0;
    std::printf("R=%lld seed=%lld lower=%.6g exact_p1=%.6g w2=%.6g upper=%.6g %s\n",
                static_cast<long long>(r.R), static_cast<long long>(r.seed),
                r.aux.count("lower") ? r.aux.at("lower") : 0.0,
                r.aux.count("exact_p1") ? r.aux.at("exact_p1") : 0.0, r.value,
                r.aux.count("upper") ? r.aux.at("upper") : 0.0, v ? "VIOLATION" : "ok");
  }
  if (bad > 0) throw InvariantViolation(std::to_string(bad) + " sandwich violation(s)");
  return kOk;
}

int cmd_fit(const Flags& f) {
  if (f.input.empty()) throw std::invalid_argument("fit needs --in");
  const auto records = read_records(f.input);
  const std::string kind = records.empty() ? "" : records.front().kind;
  const std::string model = f.model == "auto"
                                ? (kind == "witness_lower" ? "sqrtlog" : "log")
                                : f.model;
  std::cout << report(records, fit(records, parse_model(model)));
  return kOk;
}

// Fast invariant checks on one replicate per R.
int cmd_check(const ExperimentConfig& c, const Flags& f) {
  std::int64_t bad = 0;
  const auto fail = [&](const std::string& what) {
    std::printf("FAIL %s\n", what.c_str());
    ++bad;
  };
  for (std::int64_t R : c.R) {
    const Pair p = draw_pair(c, R, f.replicate);
    const std::string at = " at R=" + std::to_string(R);
    if (p.mu.size() >= 2 && p.mu.size() <= 4000) {
      const MatchingPlan plan = solve_assignment(p.mu, p.nu, 2);
      RngStream rng = replicate_stream(c.master_seed, R, f.replicate).split("cycles");
      const CycleReport cr = verify_cyclic_monotonicity(plan, p.mu, p.nu, 2000, 6, rng);
      if (cr.violations > 0) fail("cyclic monotonicity" + at);
    }
    const WitnessField w = build_witness(p.mu, R, c.M, c.h);
    const double R2 = static_cast<double>(R * R);
    if (std::abs(w.integral()) > 1e-6 * R2) fail("witness mean" + at);
    if (w.boundary_max() > 1e-9) fail("witness support" + at);
    if (w.lipschitz() > kWitnessLipschitzConstant * std::sqrt(c.M * std::log(static_cast<double>(R)))) {
      fail("witness Lipschitz law" + at);
    }
    const StoppedPartition part = build_partition(p.mu);
    if (!part.overflow) {
      const FluxField flux = assemble_flux(p.mu, part, c.h);
      if (divergence_mismatch(flux, p.mu, part) > 5.0 * c.h) fail("flux divergence" + at);
      if (flux.boundary_normal_max() > 1e-8) fail("flux boundary" + at);
    }
    std::printf("checked R=%lld\n", static_cast<long long>(R));
  }
  if (bad > 0) throw InvariantViolation(std::to_string(bad) + " check(s) failed");
  std::printf("all checks passed\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic bounds for random matching in the plane"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--R", f.R, "Comma separated list of box sides (powers of two)");
  app.add_option("--seeds", f.seeds, "Replicates per R");
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--intensity", f.intensity, "Poisson intensity");
  app.add_option("--M", f.M, "Witness stopping constant");
  app.add_option("--grid-h", f.h, "Grid spacing");
  app.add_option("--out", f.out, "Output path or stem");
  app.add_option("--format", f.format, "Record format: csv or jsonl");
  app.add_flag("--force", f.force, "Overwrite existing outputs");
  app.add_option("--config", f.config, "key=value config file; flags override it");

  auto* sample = app.add_subcommand("sample", "Draw a Poisson sample");
  auto* match = app.add_subcommand("match", "Exact matching of a Poisson sample");
  auto* w2 = app.add_subcommand("w2", "W_2^2 of a sample to its mean density");
  auto* witness = app.add_subcommand("witness", "Dual witness lower bound");
  auto* flux = app.add_subcommand("flux", "Flux certified upper bound");
  auto* sandwich = app.add_subcommand("sandwich", "lower <= exact <= upper on a sweep");
  auto* scaling = app.add_subcommand("scaling", "Scaling sweep with fit");
  auto* fitc = app.add_subcommand("fit", "Fit a record file");
  auto* check = app.add_subcommand("check", "Quick invariant checks");
  for (auto* s : {sample, match, w2, witness, flux, check}) {
    s->add_option("--replicate", f.replicate, "Replicate index")->check(CLI::NonNegativeNumber);
  }
  match->add_option("--p", f.p, "Cost exponent")->check(CLI::IsMember({1, 2}));
  scaling->add_option("--kind", f.kind, "Experiment kind");
  for (auto* s : {scaling, fitc}) s->add_option("--model", f.model, "log, sqrtlog or auto");
  for (auto* s : {scaling, sandwich}) s->add_flag("--timings", f.timings, "Record wall times");
  fitc->add_option("--in", f.input, "Record file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fitc->parsed()) return cmd_fit(f);
    ExperimentConfig c = resolve(app, f);
    if (scaling->parsed()) {
      if (!f.kind.empty()) c.kind = parse_kind(f.kind);
      c.validate();
      return cmd_scaling(c, f);
    }
    if (sandwich->parsed()) return cmd_sandwich(c, f);
    c.validate();
    if (sample->parsed()) return cmd_sample(c, f);
    if (match->parsed()) return cmd_match(c, f);
    if (w2->parsed()) return cmd_w2(c, f);
    if (witness->parsed()) return cmd_witness(c, f);
    if (flux->parsed()) return cmd_flux(c, f);
    if (check->parsed()) return cmd_check(c, f);
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kIo;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvariant;
  }
  return kUsage;
}
