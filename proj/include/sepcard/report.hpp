// Copyright 2026 The sepcard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEPCARD_REPORT_HPP
#define SEPCARD_REPORT_HPP

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sepcard {

using Json = nlohmann::ordered_json;

/// One checked quantity. `tolerance` is 0 for exact (integer/boolean) checks.
struct Check {
  std::string name;
  Json computed;
  std::optional<Json> paper_stated;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string claim;
  Json inputs = Json::object();
  std::vector<Check> results;
  double duration_ms = 0.0;

  void add(std::string name, Json computed, double tolerance, bool pass,
           std::optional<Json> paper_stated = std::nullopt) {
    results.push_back({std::move(name), std::move(computed), std::move(paper_stated), tolerance, pass});
  }

  bool all_passed() const {
    for (const auto& r : results) {
      if (!r.pass) return false;
    }
    return true;
  }

  const Check* find(const std::string& name) const {
    for (const auto& r : results) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }

  Json to_json() const {
    Json j = Json::object();
    j["claim"] = claim;
    j["inputs"] = inputs;
    Json arr = Json::array();
    for (const auto& r : results) {
      Json e = Json::object();
      e["name"] = r.name;
      e["computed"] = r.computed;
      if (r.paper_stated) e["paper_stated"] = *r.paper_stated;
      e["tolerance"] = r.tolerance;
      e["pass"] = r.pass;
      arr.push_back(std::move(e));
    }
    j["results"] = std::move(arr);
    j["duration_ms"] = duration_ms;
    return j;
  }
};

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_json(os, v, indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        os << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// JSON text with every floating-point value printed to 17 significant digits.
inline std::string serialize(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  os << '\n';
  return os.str();
}

inline std::string serialize(const Report& r, int indent = 2) { return serialize(r.to_json(), indent); }

/// Human-readable summary table.
inline void print_table(std::ostream& os, const Report& r) {
  os << "claim: " << r.claim << "\n";
  for (const auto& c : r.results) {
    std::string computed = c.computed.is_string() ? c.computed.get<std::string>() : c.computed.dump();
    if (computed.size() > 60) computed = computed.substr(0, 57) + "...";
    std::string stated = c.paper_stated ? c.paper_stated->dump() : "-";
    if (stated.size() > 20) stated = stated.substr(0, 17) + "...";
    os << "  " << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(38) << c.name << " "
       << std::setw(60) << computed << " stated=" << std::setw(20) << stated
       << " tol=" << c.tolerance << "\n";
  }
  os << (r.all_passed() ? "all checks passed" : "SOME CHECKS FAILED") << " (" << r.duration_ms
     << " ms)\n";
}

}  // namespace sepcard

#endif  // SEPCARD_REPORT_HPP
