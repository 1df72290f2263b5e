#pragma once

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "core.hpp"

namespace heis {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersionTag = "heis 0.1.0";

// Canonical report bytes: insertion-ordered keys, two-space indent, shortest
// round-trip doubles, trailing newline. This is the form the determinism
// contract compares; anything volatile (wall clock) is redacted before dumping.
inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

template <int N>
Json json_point(const HPoint<N>& p) {
  Json a = Json::array();
  for (int j = 0; j < N; ++j) a.push_back(p.z[j].real());
  for (int j = 0; j < N; ++j) a.push_back(p.z[j].imag());
  a.push_back(p.t);
  return a;
}

inline Json json_vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

namespace detail_report {

inline bool scalar_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j)
    if (e.is_object() || e.is_array()) return false;
  return true;
}

inline void table_rows(const Json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) table_rows(v, path.empty() ? k : path + "." + k, rows);
  } else if (j.is_array() && !scalar_array(j)) {
    std::size_t i = 0;
    for (const auto& v : j) table_rows(v, path + "[" + std::to_string(i++) + "]", rows);
  } else {
    rows.emplace_back(path, j.dump());
  }
}

}  // namespace detail_report

// Flat two-column rendering of a report for --format table.
inline std::string render_table(const Json& j) {
  std::vector<std::pair<std::string, std::string>> rows;
  detail_report::table_rows(j, "", rows);
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out.append(width - k.size() + 2, ' ');
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace heis
