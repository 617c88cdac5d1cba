#pragma once
// Text and JSON renderings of count, assumption, oracle, audit and curve reports.

#include "maslov/assumptions.hpp"
#include "maslov/box_audit.hpp"
#include "maslov/oracle.hpp"
#include "maslov/renormalized_count.hpp"
#include "maslov/spectral_curves.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>

namespace maslov {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const DirectionAudit& a) {
  return {{"m_plus", a.m_plus},
          {"m_minus", a.m_minus},
          {"m_zero", a.m_zero},
          {"intersection_rank", a.intersection_rank},
          {"delta", a.delta}};
}

inline Json to_json(const CrossingRecord& c) {
  Json j{{"x", c.location},
         {"multiplicity", c.multiplicity},
         {"direction", c.direction},
         {"side", to_string(c.side)},
         {"contribution", c.contribution}};
  if (c.graze) j["graze"] = true;
  if (c.audit) j["audit"] = to_json(*c.audit);
  return j;
}

inline Json to_json(const AssumptionReport& r) {
  Json items = Json::array();
  for (const auto& i : r.items)
    items.push_back({{"name", i.name},
                     {"status", to_string(i.status)},
                     {"margin", detail::json_number(i.margin)},
                     {"worst_x", detail::json_number(i.worst_x)},
                     {"worst_lambda", detail::json_number(i.worst_lambda)},
                     {"note", i.note}});
  return {{"passed", r.passed()}, {"items", items}};
}

inline Json to_json(const SpectralCountReport& r) {
  Json crossings = Json::array(), excluded = Json::array();
  for (const auto& c : r.crossings) crossings.push_back(to_json(c));
  for (const auto& c : r.excluded) excluded.push_back(to_json(c));
  return {{"count", r.count},
          {"window", {r.window.first, r.window.second}},
          {"method", r.method},
          {"maslov_index", r.maslov_index},
          {"monotone", r.monotone},
          {"max_lagrangian_residual", r.max_lagrangian_residual},
          {"crossings", crossings},
          {"excluded", excluded},
          {"assumptions", to_json(r.assumptions)},
          {"warnings", r.warnings}};
}

inline Json to_json(const ShelfReport& s) {
  Json crossings = Json::array();
  for (const auto& c : s.crossings) crossings.push_back(to_json(c));
  return {{"index", s.index},
          {"phase_motion", s.phase_motion},
          {"constant_kernel", s.constant_kernel},
          {"note", s.note},
          {"crossings", crossings}};
}

inline Json to_json(const BoxAudit& a) {
  return {{"window", {a.window.first, a.window.second}},
          {"bottom", to_json(a.bottom)},
          {"right", to_json(a.right)},
          {"top", to_json(a.top)},
          {"left", to_json(a.left)},
          {"loop_sum", a.loop_sum},
          {"count", a.count},
          {"top_clockwise", a.top_clockwise},
          {"top_weight_margin", detail::json_number(a.top_weight_margin)},
          {"consistent", a.consistent}};
}

/// Renormalized, fixed-target and finite-difference counts side by side.
struct OracleComparison {
  std::pair<double, double> window;
  int renormalized = 0;
  std::optional<int> standard;
  std::optional<OracleReport> fd;
  std::vector<std::string> notes;

  bool agree() const {
    return (!standard || *standard == renormalized) && (!fd || fd->count == renormalized);
  }
};

inline Json to_json(const OracleComparison& o) {
  Json j{{"window", {o.window.first, o.window.second}}, {"renormalized", o.renormalized}};
  j["standard"] = o.standard ? Json(*o.standard) : Json(nullptr);
  if (o.fd) {
    j["fd"] = {{"count", o.fd->count},
               {"h", o.fd->h},
               {"dimension", o.fd->dimension},
               {"eigenvalues", o.fd->eigenvalues_in_window},
               {"coarse_count", o.fd->coarse_count},
               {"max_shift", o.fd->max_shift}};
  } else {
    j["fd"] = nullptr;
  }
  j["agree"] = o.agree();
  j["notes"] = o.notes;
  return j;
}

inline Json to_json(const CurveSet& cs) {
  Json curves = Json::array();
  for (const auto& c : cs.curves)
    curves.push_back({{"id", c.id},
                      {"points", c.points.size()},
                      {"first", {c.points.front().x, c.points.front().lambda}},
                      {"last", {c.points.back().x, c.points.back().lambda}}});
  return {{"method", to_string(cs.method)},
          {"window", {cs.box.first, cs.box.second}},
          {"points", cs.points.size()},
          {"top_crossings", cs.top_crossings},
          {"curves", curves}};
}

inline std::string to_text(const CrossingRecord& c) {
  std::ostringstream s;
  s << "x = " << detail::num(c.location) << "  multiplicity " << c.multiplicity << "  direction "
    << (c.direction > 0 ? "+" : c.direction < 0 ? "-" : "0") << "  " << to_string(c.side);
  if (c.audit) s << "  audit m+ " << c.audit->m_plus << " m- " << c.audit->m_minus << " m0 " << c.audit->m_zero;
  if (c.graze) s << "  graze";
  return s.str();
}

inline std::string to_text(const AssumptionReport& r) {
  std::ostringstream s;
  for (const auto& i : r.items) {
    s << "  " << i.name << ": " << to_string(i.status);
    if (std::isfinite(i.margin)) s << "  margin " << detail::num(i.margin);
    if (std::isfinite(i.worst_x)) s << "  at x = " << detail::num(i.worst_x);
    if (std::isfinite(i.worst_lambda)) s << ", lambda = " << detail::num(i.worst_lambda);
    if (!i.note.empty()) s << "  (" << i.note << ")";
    s << "\n";
  }
  return s.str();
}

inline std::string to_text(const SpectralCountReport& r) {
  std::ostringstream s;
  s << "window: [" << detail::num(r.window.first) << ", " << detail::num(r.window.second) << ")\n";
  s << "method: " << r.method << "\n";
  s << "count: " << r.count << "\n";
  s << "maslov index: " << r.maslov_index << "\n";
  s << "monotone: " << (r.monotone ? "yes" : "no") << "\n";
  s << "max lagrangian residual: " << detail::num(r.max_lagrangian_residual) << "\n";
  s << "crossings:\n";
  for (const auto& c : r.crossings) s << "  " << to_text(c) << "\n";
  if (!r.excluded.empty()) {
    s << "excluded (x = 0):\n";
    for (const auto& c : r.excluded) s << "  " << to_text(c) << "\n";
  }
  if (!r.assumptions.items.empty()) s << "assumptions:\n" << to_text(r.assumptions);
  for (const auto& w : r.warnings) s << "warning: " << w << "\n";
  return s.str();
}

inline std::string to_text(const BoxAudit& a) {
  std::ostringstream s;
  s << "window: [" << detail::num(a.window.first) << ", " << detail::num(a.window.second) << ")\n";
  for (const auto* sh : {&a.bottom, &a.right, &a.top, &a.left}) {
    s << sh->name << ": " << sh->index << "  phase motion " << detail::num(sh->phase_motion);
    if (!sh->note.empty()) s << "  (" << sh->note << ")";
    s << "\n";
    for (const auto& c : sh->crossings) s << "  " << to_text(c) << "\n";
  }
  s << "loop sum: " << a.loop_sum << "\n";
  s << "count: " << a.count << "\n";
  s << "top clockwise: " << (a.top_clockwise ? "yes" : "no") << "\n";
  s << "consistent: " << (a.consistent ? "yes" : "no") << "\n";
  return s.str();
}

inline std::string to_text(const OracleComparison& o) {
  std::ostringstream s;
  s << "window: [" << detail::num(o.window.first) << ", " << detail::num(o.window.second) << ")\n";
  s << "method         count\n";
  s << "renormalized   " << o.renormalized << "\n";
  s << "standard       " << (o.standard ? std::to_string(*o.standard) : "n/a") << "\n";
  s << "fd             " << (o.fd ? std::to_string(o.fd->count) : "n/a") << "\n";
  if (o.fd) {
    s << "fd eigenvalues:";
    for (double e : o.fd->eigenvalues_in_window) s << " " << detail::num(e);
    s << "\nfd h: " << detail::num(o.fd->h) << "  dimension " << o.fd->dimension << "\n";
  }
  for (const auto& n : o.notes) s << "note: " << n << "\n";
  s << "agree: " << (o.agree() ? "yes" : "no") << "\n";
  return s.str();
}

inline std::string to_text(const CurveSet& cs) {
  std::ostringstream s;
  s << "method: " << to_string(cs.method) << "\n";
  s << "window: [" << detail::num(cs.box.first) << ", " << detail::num(cs.box.second) << ")\n";
  s << "points: " << cs.points.size() << "\n";
  s << "curves: " << cs.curves.size() << "\n";
  s << "top crossings:";
  for (double t : cs.top_crossings) s << " " << detail::num(t);
  s << "\n";
  return s.str();
}

}  // namespace maslov
