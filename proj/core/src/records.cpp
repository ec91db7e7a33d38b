#include "dyadot/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dyadot/errors.hpp"
#include "json.hpp"

namespace dyadot {

RecordFormat parse_format(const std::string& name) {
  if (name == "csv") return RecordFormat::kCsv;
  if (name == "jsonl") return RecordFormat::kJsonl;
  throw std::invalid_argument("unknown format '" + name + "' (csv, jsonl)");
}

const char* format_name(RecordFormat f) { return f == RecordFormat::kCsv ? "csv" : "jsonl"; }

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string record_json(const ScalingRecord& r, bool wall_time) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["R"] = r.R;
  j["seed"] = r.seed;
  j["value"] = json_number(r.value);
  j["flagged"] = r.flagged;
  j["wall_time"] = wall_time ? r.wall_time : 0.0;
  nlohmann::ordered_json aux = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.aux) aux[k] = json_number(v);
  j["aux"] = aux;
  return j.dump();
}

std::string record_csv(const ScalingRecord& r, bool wall_time) {
  std::string line = r.kind + "," + std::to_string(r.R) + "," + std::to_string(r.seed) + "," +
                     number(r.value) + "," + (r.flagged ? "1" : "0") + "," +
                     number(wall_time ? r.wall_time : 0.0) + ",";
  bool first = true;
  for (const auto& [k, v] : r.aux) {
    if (!first) line += ';';
    line += k + "=" + number(v);
    first = false;
  }
  return line;
}

void write_records(const std::vector<ScalingRecord>& records,
                   const std::filesystem::path& path, const RecordWriteOptions& options) {
  if (std::filesystem::exists(path) && !options.force) {
    throw IoError("refusing to overwrite " + path.string() + " (use --force)");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (options.format == RecordFormat::kCsv) {
    out << kRecordCsvHeader << '\n';
    for (const auto& r : records) out << record_csv(r, options.wall_time) << '\n';
  } else {
    for (const auto& r : records) out << record_json(r, options.wall_time) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ScalingRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const bool csv = path.extension() == ".csv";
  std::vector<ScalingRecord> out;
  std::string line;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      ScalingRecord r;
      if (csv) {
        if (lineno == 1) {
          if (line != kRecordCsvHeader) throw std::invalid_argument("unexpected header");
          continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() == 6) cols.emplace_back();
        if (cols.size() != 7) throw std::invalid_argument("expected 7 columns");
        r.kind = cols[0];
        r.R = std::stoll(cols[1]);
        r.seed = std::stoll(cols[2]);
        r.value = parse_double(cols[3]);
        r.flagged = cols[4] == "1";
        r.wall_time = parse_double(cols[5]);
        std::stringstream as(cols[6]);
        std::string kv;
        while (std::getline(as, kv, ';')) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw std::invalid_argument("bad aux entry '" + kv + "'");
          r.aux[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1));
        }
      } else {
        const auto j = nlohmann::json::parse(line);
        const auto num = [](const nlohmann::json& v) {
          return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        r.kind = j.at("kind").get<std::string>();
        r.R = j.at("R").get<std::int64_t>();
        r.seed = j.at("seed").get<std::int64_t>();
        r.value = num(j.at("value"));
        r.flagged = j.at("flagged").get<bool>();
        r.wall_time = j.value("wall_time", 0.0);
        for (const auto& [k, v] : j.at("aux").items()) r.aux[k] = num(v);
      }
      out.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
  return out;
}

}  // namespace dyadot
