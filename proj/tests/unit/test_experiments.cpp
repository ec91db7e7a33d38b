#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dyadot/errors.hpp"
#include "dyadot/experiments.hpp"

using namespace dyadot;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dyadot_experiments_test";
  fs::create_directories(dir);
  fs::remove(dir / name);
  return dir / name;
}

ExperimentConfig small(ExperimentKind kind, std::vector<std::int64_t> R, std::int64_t seeds) {
  ExperimentConfig c;
  c.kind = kind;
  c.R = std::move(R);
  c.seeds = seeds;
  c.master_seed = 7;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("least squares on synthetic data") {
  const std::vector<std::int64_t> R{16, 32, 64, 128};
  std::vector<double> y;
  for (std::int64_t r : R) y.push_back(2.0 + 3.0 * std::log(double(r)));
  const FitResult f = fit_means(R, y, FitModel::kLog);
  CHECK(std::abs(f.a - 2.0) < 1e-9);
  CHECK(std::abs(f.b - 3.0) < 1e-9);
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.t_ratio() > 1e6);

  // The same data are curved in sqrt(ln R).
  const FitResult g = fit_means(R, y, FitModel::kSqrtLog);
  CHECK(g.r_squared < 0.9999);
  CHECK(g.b_stderr > 1e-3);

  // Hand-computed regression for three points: x = 1, 2, 3 in ln R / ln 2.
  const std::vector<std::int64_t> R3{2, 4, 8};
  const std::vector<double> y3{1.0, 2.0, 2.0};
  const FitResult h = fit_means(R3, y3, FitModel::kLog);
  CHECK(h.b * std::log(2.0) == doctest::Approx(0.5));
  CHECK(h.a == doctest::Approx(2.0 / 3.0));
  CHECK(h.r_squared == doctest::Approx(0.75));

  CHECK_THROWS_AS(fit_means(std::vector<std::int64_t>{16, 16, 32},
                            std::vector<double>{1, 2, 3}, FitModel::kLog),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_means(R, std::vector<double>{1.0}, FitModel::kLog), std::invalid_argument);
  CHECK(parse_model("sqrtlog") == FitModel::kSqrtLog);
  CHECK(std::string(model_name(FitModel::kLog)) == "log");
  CHECK_THROWS_AS(parse_model("cubic"), std::invalid_argument);
}

TEST_CASE("fit averages per R and skips flagged records") {
  std::vector<ScalingRecord> recs;
  for (std::int64_t r : {4, 8, 16}) {
    recs.push_back({"k", r, 0, 1.0, {}, false, 0.0});
    recs.push_back({"k", r, 1, 3.0, {}, false, 0.0});
    recs.push_back({"k", r, 2, 1e9, {}, true, 0.0});
  }
  const FitResult f = fit(recs, FitModel::kLog);
  REQUIRE(f.mean.size() == 3);
  for (double m : f.mean) CHECK(m == 2.0);
  CHECK(f.b == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("every kind produces one record per replicate") {
  for (ExperimentKind k : {ExperimentKind::kMatchCost, ExperimentKind::kW2Lebesgue,
                           ExperimentKind::kWitnessLower, ExperimentKind::kFluxUpper,
                           ExperimentKind::kSandwich, ExperimentKind::kMoments}) {
    int calls = 0;
    const auto recs = run(small(k, {4}, 1), [&](const ScalingRecord&) { ++calls; });
    REQUIRE(recs.size() == 1);
    CHECK(calls == 1);
    CHECK(recs[0].kind == kind_name(k));
    CHECK(parse_kind(kind_name(k)) == k);
    CHECK(recs[0].R == 4);
    CHECK(recs[0].aux.count("count") + recs[0].aux.count("exceeds_root") == 1);
  }
  CHECK_THROWS_AS(parse_kind("nope"), std::invalid_argument);
}

TEST_CASE("records are sorted and reruns are byte identical") {
  const ExperimentConfig c = small(ExperimentKind::kFluxUpper, {16, 8}, 3);
  const auto a = run(c);
  const auto b = run(c);
  REQUIRE(a.size() == 6);
  CHECK(a[0].R == 8);
  CHECK(a[3].R == 16);
  CHECK(a[4].seed == 1);
  const fs::path pa = scratch("a.jsonl");
  const fs::path pb = scratch("b.jsonl");
  write_records(a, pa, {});
  write_records(b, pb, {});
  CHECK(slurp(pa) == slurp(pb));
}

TEST_CASE("sandwich ordering holds at R = 8") {
  const auto recs = run(small(ExperimentKind::kSandwich, {8}, 10));
  for (const auto& r : recs) {
    if (r.flagged) continue;
    CHECK(r.aux.at("violation") == 0.0);
    CHECK(r.aux.at("lower") <= r.aux.at("exact_p1") + 1e-9);
    CHECK(r.value <= r.aux.at("upper"));
  }
}

TEST_CASE("report layout") {
  CHECK(report({}, std::nullopt).rfind("warning: no records\n", 0) == 0);
  const std::vector<ScalingRecord> recs{{"w2_lebesgue", 4, 0, 1.0, {}, false, 0.0},
                                        {"w2_lebesgue", 4, 1, 3.0, {}, false, 0.0},
                                        {"w2_lebesgue", 8, 0, 2.0, {}, true, 0.0}};
  const std::string text = report(recs, std::nullopt);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == kReportHeader);
  CHECK(line == "kind\tR\tseeds\tflagged\tmean\tstderr");
  std::getline(in, line);
  CHECK(line == "w2_lebesgue\t4\t2\t0\t2\t1");
  std::getline(in, line);
  CHECK(line == "w2_lebesgue\t8\t0\t1\t0\t0");

  const std::vector<std::int64_t> R{16, 32, 64};
  const FitResult f = fit_means(R, std::vector<double>{1.0, 1.1, 1.3}, FitModel::kLog);
  ReportThresholds t;
  t.min_r_squared = 0.9;
  const std::string with_fit = report(recs, f, t);
  CHECK(with_fit.find("fit: value = a + b ln R\n") != std::string::npos);
  CHECK(with_fit.find("slope b > 0 and b/stderr > 3: PASS\n") != std::string::npos);
  CHECK(with_fit.find("R^2 > 0.9: PASS\n") != std::string::npos);
}

TEST_CASE("golden records for a pinned seed") {
  ExperimentConfig c = small(ExperimentKind::kW2Lebesgue, {4, 8}, 2);
  c.master_seed = 2024;
  const fs::path out = scratch("golden.jsonl");
  write_records(run(c), out, {});
  const fs::path golden = fs::path(DYADOT_GOLDEN_DIR) / "w2_lebesgue_seed2024.jsonl";
  if (std::getenv("DYADOT_UPDATE_GOLDEN") != nullptr) fs::copy_file(out, golden, fs::copy_options::overwrite_existing);
  REQUIRE(fs::exists(golden));
  CHECK(slurp(out) == slurp(golden));
}

TEST_CASE("configuration text") {
  ExperimentConfig c;
  apply_config_text(c,
                    "# scaling run\n"
                    "kind = witness_lower\n"
                    "R = 16, 32,64\n"
                    "\n"
                    "seeds=5  # per R\n"
                    "seed=9\n"
                    "M=8\n"
                    "grid-h=0.125\n"
                    "format=csv\n"
                    "force=true\n"
                    "out=runs/w.csv\n");
  CHECK(c.kind == ExperimentKind::kWitnessLower);
  CHECK(c.R == std::vector<std::int64_t>{16, 32, 64});
  CHECK(c.seeds == 5);
  CHECK(c.master_seed == 9);
  CHECK(c.M == 8.0);
  CHECK(c.h == 0.125);
  CHECK(c.format == RecordFormat::kCsv);
  CHECK(c.force);
  CHECK(c.out == fs::path("runs/w.csv"));
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(apply_config_text(c, "colour=blue\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(c, "seeds=many\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(c, "just words\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_r_list(""), std::invalid_argument);

  ExperimentConfig bad;
  bad.R = {6};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.R = {8};
  bad.kind = ExperimentKind::kFluxUpper;
  bad.h = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.h = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.kind = ExperimentKind::kW2Lebesgue;
  CHECK_NOTHROW(bad.validate());
  bad.seeds = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const fs::path file = scratch("run.cfg");
  std::ofstream(file) << "kind=moments\nR=8\n";
  ExperimentConfig from_file;
  apply_config_file(from_file, file);
  CHECK(from_file.kind == ExperimentKind::kMoments);
  CHECK_THROWS_AS(apply_config_file(from_file, scratch("missing.cfg")), IoError);
}

TEST_CASE("existing outputs are not overwritten") {
  const std::vector<ScalingRecord> recs{{"moments", 8, 0, 1.0, {}, false, 0.0}};
  const fs::path p = scratch("keep.jsonl");
  write_records(recs, p, {});
  CHECK_THROWS_AS(write_records(recs, p, {}), IoError);
  RecordWriteOptions force;
  force.force = true;
  CHECK_NOTHROW(write_records(recs, p, force));
  const fs::path s = scratch("summary.csv");
  write_summary_csv(recs, s, false);
  CHECK(slurp(s).rfind("kind,R,seeds,flagged,mean,stderr\n", 0) == 0);
  CHECK_THROWS_AS(write_summary_csv(recs, s, false), IoError);
}

TEST_CASE("csv and jsonl round trip") {
  std::vector<ScalingRecord> recs{
      {"sandwich", 8, 0, 0.1 + 0.2, {{"lower", 1.0 / 3.0}, {"upper", 12.5}}, false, 0.25},
      {"sandwich", 8, 1, -1e-300, {}, true, 0.0},
      {"flux_upper", 16, 4, 123456.789, {{"brutal", 1.0}}, true, 1.5}};
  for (RecordFormat fmt : {RecordFormat::kJsonl, RecordFormat::kCsv}) {
    const fs::path p = scratch(std::string("rt.") + (fmt == RecordFormat::kCsv ? "csv" : "jsonl"));
    RecordWriteOptions o;
    o.format = fmt;
    o.wall_time = true;
    write_records(recs, p, o);
    CHECK(read_records(p) == recs);
    if (fmt == RecordFormat::kCsv) {
      CHECK(slurp(p).rfind(std::string(kRecordCsvHeader) + "\n", 0) == 0);
    }
  }
  // Without wall times the column reads back as zero.
  const fs::path p = scratch("nowall.jsonl");
  write_records(recs, p, {});
  CHECK(read_records(p)[0].wall_time == 0.0);
  CHECK(parse_format("csv") == RecordFormat::kCsv);
  CHECK(std::string(format_name(RecordFormat::kJsonl)) == "jsonl");
  CHECK_THROWS_AS(read_records(scratch("absent.jsonl")), IoError);

  ScalingRecord inf{"match_cost", 8, 0, 1.0, {{"D_R", INFINITY}}, true, 0.0};
  CHECK(record_json(inf).find("\"D_R\":null") != std::string::npos);
}

}
