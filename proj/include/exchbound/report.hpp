/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "exchbound/error.hpp"
#include "exchbound/montecarlo.hpp"

namespace exchbound::io {

inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr std::string_view kCsvHeader =
    "model_id,M,t,side,method,value,ci_low,ci_high,hoeffding,kl_form,h0,valid,violation";

struct ReportMetadata {
  std::string command;
  std::uint64_t master_seed = 0;
  std::uint64_t replications = 0;
  double level = kDefaultLevel;
  std::string tool_version = std::string(kToolVersion);
  std::string timestamp;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct Report {
  ReportMetadata metadata;
  std::vector<SweepRow> rows;
};

enum class Format { Csv, Json };

/// 17 significant digits; non-finite values as "nan", "inf", "-inf".
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "'");
  return v;
}

inline Side parse_side(const std::string& s) {
  if (s == "upper") return Side::Upper;
  if (s == "lower") return Side::Lower;
  throw Error(ErrorCode::InvalidArgument, "side must be 'upper' or 'lower', got '" + s + "'");
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::uint64_t parse_count(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || *end != '\0') {
    throw Error(ErrorCode::InvalidArgument, "bad count '" + s + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorCode::InvalidArgument, "expected true/false, got '" + s + "'");
}

}  // namespace detail

inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  const auto& m = r.metadata;
  os << "# command=" << m.command << '\n'
     << "# tool_version=" << m.tool_version << '\n'
     << "# timestamp=" << m.timestamp << '\n'
     << "# master_seed=" << m.master_seed << '\n'
     << "# replications=" << m.replications << '\n'
     << "# level=" << format_double(m.level) << '\n'
     << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << detail::csv_field(row.model_id) << ',' << row.M << ',' << format_double(row.t) << ','
       << to_string(row.side) << ',' << detail::csv_field(row.method) << ','
       << format_double(row.value) << ',' << format_double(row.ci_low) << ','
       << format_double(row.ci_high) << ',' << format_double(row.hoeffding) << ','
       << format_double(row.kl_form) << ',' << format_double(row.h0) << ','
       << (row.valid ? "true" : "false") << ',' << (row.violation ? "true" : "false") << '\n';
  }
  return os.str();
}

inline Report parse_csv(const std::string& text) {
  Report r;
  std::istringstream is(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      auto& m = r.metadata;
      if (key == "command") m.command = value;
      else if (key == "tool_version") m.tool_version = value;
      else if (key == "timestamp") m.timestamp = value;
      else if (key == "master_seed") m.master_seed = detail::parse_count(value);
      else if (key == "replications") m.replications = detail::parse_count(value);
      else if (key == "level") m.level = parse_double(value);
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw Error(ErrorCode::InvalidArgument, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 13) throw Error(ErrorCode::InvalidArgument, "expected 13 CSV columns");
    SweepRow row;
    row.model_id = f[0];
    row.M = static_cast<std::size_t>(detail::parse_count(f[1]));
    row.t = parse_double(f[2]);
    row.side = parse_side(f[3]);
    row.method = f[4];
    row.value = parse_double(f[5]);
    row.ci_low = parse_double(f[6]);
    row.ci_high = parse_double(f[7]);
    row.hoeffding = parse_double(f[8]);
    row.kl_form = parse_double(f[9]);
    row.h0 = parse_double(f[10]);
    row.valid = detail::parse_bool(f[11]);
    row.violation = detail::parse_bool(f[12]);
    r.rows.push_back(std::move(row));
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON. Numbers that JSON cannot carry are written as the strings "nan", "inf", "-inf".

namespace detail {

inline nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline double json_to_double(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw Error(ErrorCode::InvalidArgument, "expected a number");
}

}  // namespace detail

inline nlohmann::json report_to_json(const Report& r) {
  using nlohmann::json;
  const auto& m = r.metadata;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j;
    j["model_id"] = row.model_id;
    j["M"] = row.M;
    j["t"] = detail::json_number(row.t);
    j["side"] = std::string(to_string(row.side));
    j["method"] = row.method;
    j["value"] = detail::json_number(row.value);
    j["ci_low"] = detail::json_number(row.ci_low);
    j["ci_high"] = detail::json_number(row.ci_high);
    j["hoeffding"] = detail::json_number(row.hoeffding);
    j["kl_form"] = detail::json_number(row.kl_form);
    j["h0"] = detail::json_number(row.h0);
    j["valid"] = row.valid;
    j["violation"] = row.violation;
    rows.push_back(std::move(j));
  }
  return {{"metadata",
           {{"command", m.command},
            {"tool_version", m.tool_version},
            {"timestamp", m.timestamp},
            {"master_seed", m.master_seed},
            {"replications", m.replications},
            {"level", m.level}}},
          {"rows", rows}};
}

inline std::string to_json(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

namespace detail {

inline Report report_from_json(const nlohmann::json& doc) {
  Report r;
  const auto& m = doc.at("metadata");
  r.metadata.command = m.at("command").get<std::string>();
  r.metadata.tool_version = m.at("tool_version").get<std::string>();
  r.metadata.timestamp = m.at("timestamp").get<std::string>();
  r.metadata.master_seed = m.at("master_seed").get<std::uint64_t>();
  r.metadata.replications = m.at("replications").get<std::uint64_t>();
  r.metadata.level = m.at("level").get<double>();
  for (const auto& j : doc.at("rows")) {
    SweepRow row;
    row.model_id = j.at("model_id").get<std::string>();
    row.M = j.at("M").get<std::size_t>();
    row.t = detail::json_to_double(j.at("t"));
    row.side = parse_side(j.at("side").get<std::string>());
    row.method = j.at("method").get<std::string>();
    row.value = detail::json_to_double(j.at("value"));
    row.ci_low = detail::json_to_double(j.at("ci_low"));
    row.ci_high = detail::json_to_double(j.at("ci_high"));
    row.hoeffding = detail::json_to_double(j.at("hoeffding"));
    row.kl_form = detail::json_to_double(j.at("kl_form"));
    row.h0 = detail::json_to_double(j.at("h0"));
    row.valid = j.at("valid").get<bool>();
    row.violation = j.at("violation").get<bool>();
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace detail

inline Report parse_json(const std::string& text) {
  try {
    return detail::report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON report: ") + e.what());
  }
}

inline std::string encode(const Report& r, Format f) { return f == Format::Csv ? to_csv(r) : to_json(r); }

inline Report decode(const std::string& text, Format f) {
  return f == Format::Csv ? parse_csv(text) : parse_json(text);
}

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so a failed run never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

}  // namespace exchbound::io
