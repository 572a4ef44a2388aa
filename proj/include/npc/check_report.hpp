#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npc/domain_graph.hpp"

namespace npc {

/// How a check decides pass/fail.
///  - Exact: a hard inequality with an arithmetic-level tolerance.
///  - Trend: pass criteria on refinement behavior or frozen empirical constants.
///  - Diagnostic: values are recorded; `pass` only reflects well-posedness.
enum class GateClass { Exact, Trend, Diagnostic };

const char* to_string(GateClass gate);

/// Outcome of one inequality check.
struct CheckReport {
  std::string name;
  GateClass gate = GateClass::Exact;
  bool pass = true;
  /// Largest amount by which the checked inequality fails (<= 0 when it holds
  /// everywhere; then it is minus the smallest slack).
  double max_violation = 0.0;
  double tolerance = 0.0;
  long observations = 0;
  std::vector<Vertex> witnesses;
  std::vector<std::string> notes;
  /// Named measured quantities (empirical constants, fractions, trends).
  std::map<std::string, double> measured;

  CheckReport() = default;
  CheckReport(std::string name_, GateClass gate_) : name(std::move(name_)), gate(gate_) {}

  /// Smallest observed slack, i.e. -max_violation.
  [[nodiscard]] double slack() const { return -max_violation; }
  void note(std::string text) { notes.push_back(std::move(text)); }
  /// Tracks a per-item violation `v` (positive means the inequality fails) and
  /// records `witness` when it exceeds the tolerance.
  void observe(double v, Vertex witness = -1);
  /// Recomputes `pass` from max_violation <= tolerance.
  void settle() { pass = max_violation <= tolerance; }
};

nlohmann::json to_json(const CheckReport& r);
CheckReport report_from_json(const nlohmann::json& j);

}  // namespace npc
