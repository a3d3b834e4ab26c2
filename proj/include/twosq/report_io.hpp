#pragma once
// TallyReport <-> JSON / CSV, atomic file writes, per-segment checkpoints.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twosq/errors.hpp"
#include "twosq/pair_sieve.hpp"
#include "twosq/statistics.hpp"

namespace twosq {

inline constexpr const char* kVersion = "twosq 1.0.0";
inline constexpr int kSchemaVersion = 1;

/// 17 significant digits, enough to round-trip a double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json to_json(const TallyReport& t) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["x"] = t.x;
  j["generated_by_version"] = kVersion;
  j["lo"] = t.lo;
  j["hi"] = t.hi;
  if (t.has_joint) {
    auto joint = nlohmann::json::array();
    for (const auto& [cell, count] : t.joint) joint.push_back({cell.first, cell.second, count});
    j["joint"] = std::move(joint);
  }
  auto off = nlohmann::json::array();
  for (const auto& [r, count] : t.off_N) off.push_back({r, count});
  j["off_N"] = std::move(off);
  j["r1_total"] = t.r1_total;
  j["r1_star_total"] = t.r1_star_total;
  j["moment2"] = t.moment2;
  j["moment3"] = t.moment3;
  j["gcd_defect"] = t.gcd_defect;
  return j;
}

inline TallyReport tally_from_json(const nlohmann::json& j) {
  try {
    TallyReport t;
    t.x = j.at("x").get<u64>();
    t.lo = j.value("lo", u64{2});
    t.hi = j.value("hi", t.x + 1);
    if (j.contains("joint")) {
      for (const auto& row : j.at("joint")) {
        detail::require(row.size() == 3, "joint rows must be [k, r, count]");
        t.joint[{row[0].get<unsigned>(), row[1].get<unsigned>()}] = row[2].get<u64>();
      }
    } else {
      t.has_joint = false;
    }
    if (j.contains("off_N"))
      for (const auto& row : j.at("off_N")) t.off_N[row.at(0).get<unsigned>()] = row.at(1).get<u64>();
    t.r1_total = j.at("r1_total").get<u64>();
    t.r1_star_total = j.at("r1_star_total").get<u64>();
    t.moment2 = j.at("moment2").get<u64>();
    t.moment3 = j.at("moment3").get<u64>();
    t.gcd_defect = j.at("gcd_defect").get<u64>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed TallyReport JSON: ") + e.what());
  }
}

inline std::string tally_to_csv(const TallyReport& t) {
  if (!t.has_joint) throw CapabilityError("report has no joint (k, r) histogram");
  std::string out = "k,r,count\n";
  for (const auto& [cell, count] : t.joint)
    out += std::to_string(cell.first) + "," + std::to_string(cell.second) + "," +
           std::to_string(count) + "\n";
  return out;
}

inline std::string comparisons_to_csv(const std::vector<AsymptoticComparison>& rows) {
  std::string out = "x,empirical,predicted,ratio,note\n";
  for (const auto& c : rows)
    out += format_double(c.x) + "," + format_double(c.empirical) + "," + format_double(c.predicted) +
           "," + format_double(c.ratio) + "," + c.note + "\n";
  return out;
}

inline nlohmann::json to_json(const AsymptoticComparison& c) {
  return {{"x", c.x}, {"empirical", c.empirical}, {"predicted", c.predicted}, {"ratio", c.ratio},
          {"note", c.note}};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write to a sibling temp file, then rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("rename to " + path.string() + " failed: " + ec.message());
}

inline TallyReport load_tally(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return tally_from_json(j);
}

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const SegmentRange& r) {
  return dir / ("segment_" + std::to_string(r.lo) + "_" + std::to_string(r.hi) + ".json");
}

inline void save_checkpoint(const std::filesystem::path& dir, const TallyReport& t) {
  write_atomic(checkpoint_path(dir, {t.lo, t.hi}), to_json(t).dump() + "\n");
}

/// Every checkpoint in dir that belongs to a run at this x.
inline std::map<SegmentRange, TallyReport> load_checkpoints(const std::filesystem::path& dir, u64 x) {
  std::map<SegmentRange, TallyReport> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || !name.starts_with("segment_") || !name.ends_with(".json"))
      continue;
    TallyReport t = load_tally(entry.path());
    if (t.x != x) continue;
    out[{t.lo, t.hi}] = std::move(t);
  }
  return out;
}

}  // namespace twosq
