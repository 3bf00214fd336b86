#pragma once

#include "blochlab/dyadic.hpp"
#include "blochlab/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace blochlab {

using Json = nlohmann::ordered_json;

/// Fixed 17-significant-digit formatting for deterministic text output.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::int64_t to_i64(const Int& v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error(std::string(what) + " does not fit a 64-bit integer in the dump");
  return v.convert_to<std::int64_t>();
}

inline Json rational_json(const Rational& r) {
  return Json::array({to_i64(numerator(r), "numerator"), to_i64(denominator(r), "denominator")});
}

}  // namespace detail

/// { "total_mass": [num, den], "depth": D, "arcs": [ {level, index, mass} ] }
/// listing all arcs at level D.
inline Json dump_measure(const DyadicMeasure& mu, int depth) {
  Json j;
  j["total_mass"] = detail::rational_json(mu.total_mass());
  j["depth"] = depth;
  Json arcs = Json::array();
  mu.enumerate(depth, [&](const DyadicArc& I, const Rational& m) {
    Json a;
    a["level"] = I.level;
    a["index"] = I.index;
    a["mass"] = detail::rational_json(m);
    arcs.push_back(std::move(a));
  });
  j["arcs"] = std::move(arcs);
  return j;
}

inline DyadicMeasure load_measure(const Json& j) {
  Rational total(Int(j.at("total_mass").at(0).get<std::int64_t>()),
                 Int(j.at("total_mass").at(1).get<std::int64_t>()));
  int depth = j.at("depth").get<int>();
  std::map<std::pair<int, std::uint64_t>, Rational> table;
  for (const auto& a : j.at("arcs")) {
    Rational m(Int(a.at("mass").at(0).get<std::int64_t>()),
               Int(a.at("mass").at(1).get<std::int64_t>()));
    table.emplace(std::make_pair(a.at("level").get<int>(), a.at("index").get<std::uint64_t>()), m);
  }
  return DyadicMeasure(total, std::move(table), depth);
}

/// { "depth": D, "survivors": [ [k...] per level ] }
inline Json dump_closed_set(const DyadicClosedSet& E) {
  Json j;
  j["depth"] = E.depth();
  Json sv = Json::array();
  for (int n = 0; n <= E.depth(); ++n) sv.push_back(E.level(n));
  j["survivors"] = std::move(sv);
  return j;
}

inline DyadicClosedSet load_closed_set(const Json& j) {
  std::vector<std::vector<std::uint64_t>> sv;
  for (const auto& lv : j.at("survivors")) sv.push_back(lv.get<std::vector<std::uint64_t>>());
  if (int(sv.size()) != j.at("depth").get<int>() + 1)
    throw std::invalid_argument("closed-set dump depth does not match survivor levels");
  return DyadicClosedSet(std::move(sv));
}

inline Json tail_report_json(const TailReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["tail_ratio"] = format_double(r.tail_ratio);
  j["total"] = format_double(r.total());
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline std::string tail_report_csv(const TailReport& r) {
  std::string out = "level,contribution,cumulative,unreliable\n";
  for (const auto& e : r.per_level)
    out += std::to_string(e.level) + "," + format_double(e.contribution) + "," +
           format_double(e.cumulative) + "," + (e.unreliable ? "1" : "0") + "\n";
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return Json::parse(in);
}

}  // namespace blochlab
