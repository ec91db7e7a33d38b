#include "dyadot/fit.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace dyadot {

FitModel parse_model(const std::string& name) {
  if (name == "log") return FitModel::kLog;
  if (name == "sqrtlog") return FitModel::kSqrtLog;
  throw std::invalid_argument("unknown fit model '" + name + "' (log, sqrtlog)");
}

const char* model_name(FitModel m) { return m == FitModel::kLog ? "log" : "sqrtlog"; }

double FitResult::t_ratio() const {
  if (b_stderr > 0.0) return b / b_stderr;
  if (b == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), b);
}

FitResult fit_means(std::span<const std::int64_t> R, std::span<const double> y, FitModel model) {
  if (R.size() != y.size()) throw std::invalid_argument("fit: R and values differ in length");
  if (std::set<std::int64_t>(R.begin(), R.end()).size() < 3) {
    throw std::invalid_argument("fit: need at least 3 distinct R values");
  }
  const std::size_t n = R.size();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (R[k] <= 1) throw std::invalid_argument("fit: R must exceed 1");
    const double l = std::log(static_cast<double>(R[k]));
    x[k] = model == FitModel::kLog ? l : std::sqrt(l);
  }
  double xm = 0.0;
  double ym = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    xm += x[k];
    ym += y[k];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - xm) * (x[k] - xm);
    sxy += (x[k] - xm) * (y[k] - ym);
    syy += (y[k] - ym) * (y[k] - ym);
  }
  FitResult f;
  f.model = model;
  f.R.assign(R.begin(), R.end());
  f.mean.assign(y.begin(), y.end());
  f.b = sxy / sxx;
  f.a = ym - f.b * xm;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = y[k] - (f.a + f.b * x[k]);
    ssr += e * e;
  }
  const double s2 = ssr / static_cast<double>(n - 2);
  f.b_stderr = std::sqrt(s2 / sxx);
  f.a_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xm * xm / sxx));
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

FitResult fit(const std::vector<ScalingRecord>& records, FitModel model) {
  std::map<std::int64_t, std::pair<double, std::int64_t>> acc;
  for (const auto& r : records) {
    if (r.flagged) continue;
    auto& [sum, count] = acc[r.R];
    sum += r.value;
    ++count;
  }
  std::vector<std::int64_t> Rs;
  std::vector<double> means;
  for (const auto& [R, sc] : acc) {
    Rs.push_back(R);
    means.push_back(sc.first / static_cast<double>(sc.second));
  }
  return fit_means(Rs, means, model);
}

}  // namespace dyadot
