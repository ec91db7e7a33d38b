#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dyadot {

/// One (kind, R, seed) measurement.
struct ScalingRecord {
  std::string kind;
  std::int64_t R = 0;
  std::int64_t seed = 0;
  double value = 0.0;
  /// Named side quantities (lipschitz, count, overflow flag as 0/1, ...).
  std::map<std::string, double> aux;
  /// value is not usable in fits (empty window, brutal fallback, ...).
  bool flagged = false;
  double wall_time = 0.0;

  friend bool operator==(const ScalingRecord&, const ScalingRecord&) = default;
};

enum class RecordFormat { kCsv, kJsonl };

RecordFormat parse_format(const std::string& name);
const char* format_name(RecordFormat f);

/// Header of the CSV form. The aux column holds `key=value` pairs joined by
/// ';' in key order.
inline constexpr const char* kRecordCsvHeader = "kind,R,seed,value,flagged,wall_time,aux";

struct RecordWriteOptions {
  RecordFormat format = RecordFormat::kJsonl;
  /// Replace an existing file; otherwise an existing path is an IoError.
  bool force = false;
  /// Wall times vary between runs; they are written as 0 unless requested,
  /// so that repeated runs give identical files.
  bool wall_time = false;
};

void write_records(const std::vector<ScalingRecord>& records,
                   const std::filesystem::path& path, const RecordWriteOptions& options);
/// Format from the extension (.csv, otherwise JSONL).
std::vector<ScalingRecord> read_records(const std::filesystem::path& path);

std::string record_json(const ScalingRecord& r, bool wall_time = true);
std::string record_csv(const ScalingRecord& r, bool wall_time = true);

}  // namespace dyadot
