#pragma once

// Structured pass/fail records.  The single invariant everything downstream
// relies on:  passed  <=>  measured <= bound + tolerance.  Quantities that
// must stay ABOVE a floor (positivity margins, smallest singular values) are
// recorded negated so the same invariant applies; the context keeps the raw
// value and the direction for human readers.

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gex {

inline std::string format_scalar(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

struct CheckReport {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  std::map<std::string, std::string> context;
};

inline CheckReport make_report(std::string name, double measured, double bound,
                               double tolerance,
                               std::map<std::string, std::string> context = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.bound = bound;
  r.tolerance = tolerance;
  r.passed = measured <= bound + tolerance;
  r.context = std::move(context);
  return r;
}

// value must be >= floor - tolerance to pass.
inline CheckReport make_lower_bound_report(std::string name, double value, double floor,
                                           double tolerance,
                                           std::map<std::string, std::string> context = {}) {
  context["direction"] = "lower-bound";
  context["raw_value"] = format_scalar(value);
  context["raw_floor"] = format_scalar(floor);
  return make_report(std::move(name), -value, -floor, tolerance, std::move(context));
}

inline bool all_passed(const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports)
    if (!r.passed) return false;
  return true;
}

}  // namespace gex
