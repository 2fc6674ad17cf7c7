#pragma once

#include <map>
#include <optional>
#include <string>

namespace tvflow {

/// Result of an extinction-time bound evaluation.
struct BoundReport {
  double bound = 0.0;
  std::string formula;
  std::map<std::string, double> constants;
  std::optional<double> actual;
  std::optional<double> slack;
  /// False when a constant entering the bound is a literature default rather than a proven value.
  bool certified_constants = true;

  void attach_actual(double t) {
    actual = t;
    slack = bound - t;
  }
  bool consistent(double tol = 1e-12) const { return !slack || *slack >= -tol * (1.0 + bound); }
};

}  // namespace tvflow
