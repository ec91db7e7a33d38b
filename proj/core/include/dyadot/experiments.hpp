#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyadot/fit.hpp"
#include "dyadot/records.hpp"

namespace dyadot {

enum class ExperimentKind { kMatchCost, kW2Lebesgue, kWitnessLower, kFluxUpper, kSandwich, kMoments };

ExperimentKind parse_kind(const std::string& name);
const char* kind_name(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kW2Lebesgue;
  std::vector<std::int64_t> R{16, 32, 64, 128};
  std::int64_t seeds = 1;
  std::uint64_t master_seed = 1;
  double intensity = 1.0;
  double M = 16.0;
  double h = 0.25;
  std::filesystem::path out;
  RecordFormat format = RecordFormat::kJsonl;
  bool force = false;

  /// R values powers of two >= 4, seeds >= 1, intensity, M > 0. h must
  /// divide 1 for w2_lebesgue and match_cost, and divide 1/2 with h <= 1/4
  /// for the kinds that build a witness or a flux.
  void validate() const;
};

/// Applies one `key=value` setting (keys: kind, R, seeds, seed, intensity,
/// M, grid-h, out, format, force). Throws std::invalid_argument on an
/// unknown key or a malformed value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Flat key=value text; blank lines and '#' comments are skipped.
void apply_config_text(ExperimentConfig& config, const std::string& text);
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

std::vector<std::int64_t> parse_r_list(const std::string& text);

/// Called after each record; may be empty.
using RecordCallback = std::function<void(const ScalingRecord&)>;

/// One record per (R, seed), sorted by (kind, R, seed). Each replicate draws
/// from replicate_stream(master_seed, R, seed), so the output depends only
/// on the config.
///   match_cost    mu Poisson, nu uniform with |mu| points on (0,2R)^2; value
///                 E(R) of the optimal p=2 matching, D(R) and parts in aux
///   w2_lebesgue   W_2^2(mu, n) on (0,R)^2 divided by R^2
///   witness_lower normalized witness value, exact p=1 cost in aux
///   flux_upper    certified bound on W_2^2(mu, n) divided by R^2
///   sandwich      exact W_2^2(mu, n); lower, exact_p1 and upper in aux and
///                 aux.violation = 1 when an ordering fails
///   moments       r*^4 at the centre; N^2/|Q| and cell energy / |Q| of the root
std::vector<ScalingRecord> run(const ExperimentConfig& config,
                               const RecordCallback& progress = {});

/// First line of every table from report().
inline constexpr const char* kReportHeader = "kind\tR\tseeds\tflagged\tmean\tstderr";

struct ReportThresholds {
  double min_t_ratio = 3.0;
  std::optional<double> min_r_squared;
};

/// Per-(kind, R) mean and standard error of the unflagged values, then the
/// fit line and pass/fail against the thresholds.
std::string report(const std::vector<ScalingRecord>& records, const std::optional<FitResult>& fit,
                   const ReportThresholds& thresholds = {});

/// CSV `kind,R,seeds,flagged,mean,stderr`.
void write_summary_csv(const std::vector<ScalingRecord>& records,
                       const std::filesystem::path& path, bool force);

}  // namespace dyadot
