#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyadot/records.hpp"

namespace dyadot {

enum class FitModel {
  kLog,      // a + b ln R
  kSqrtLog,  // a + b sqrt(ln R)
};

FitModel parse_model(const std::string& name);
const char* model_name(FitModel m);

struct FitResult {
  FitModel model = FitModel::kLog;
  double a = 0.0;
  double b = 0.0;
  double a_stderr = 0.0;
  double b_stderr = 0.0;
  /// Coefficient of determination.
  double r_squared = 0.0;
  std::vector<std::int64_t> R;
  std::vector<double> mean;

  /// b / b_stderr; infinite for an exact fit with b != 0.
  double t_ratio() const;
};

/// Ordinary least squares of y against the model regressor of R. Needs at
/// least 3 distinct R values (std::invalid_argument otherwise).
FitResult fit_means(std::span<const std::int64_t> R, std::span<const double> y, FitModel model);

/// Fits the per-R means of the unflagged records, so each R weighs the same.
FitResult fit(const std::vector<ScalingRecord>& records, FitModel model);

}  // namespace dyadot
