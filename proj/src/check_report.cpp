#include "npc/check_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace npc {

const char* to_string(GateClass gate) {
  switch (gate) {
    case GateClass::Exact: return "exact";
    case GateClass::Trend: return "trend";
    case GateClass::Diagnostic: return "diagnostic";
  }
  return "unknown";
}

void CheckReport::observe(double v, Vertex witness) {
  max_violation = observations == 0 ? v : std::max(max_violation, v);
  ++observations;
  if (witness >= 0 && v > tolerance && witnesses.size() < 64 &&
      std::find(witnesses.begin(), witnesses.end(), witness) == witnesses.end())
    witnesses.push_back(witness);
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["gate"] = to_string(r.gate);
  j["pass"] = r.pass;
  j["max_violation"] = r.max_violation;
  j["tolerance"] = r.tolerance;
  j["observations"] = r.observations;
  j["witnesses"] = r.witnesses;
  j["notes"] = r.notes;
  nlohmann::json measured = nlohmann::json::object();
  for (const auto& [k, v] : r.measured) measured[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  j["measured"] = measured;
  return j;
}

CheckReport report_from_json(const nlohmann::json& j) {
  CheckReport r;
  r.name = j.at("name").get<std::string>();
  const auto gate = j.value("gate", std::string("exact"));
  r.gate = gate == "trend" ? GateClass::Trend : gate == "diagnostic" ? GateClass::Diagnostic : GateClass::Exact;
  r.pass = j.at("pass").get<bool>();
  r.max_violation = j.at("max_violation").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.observations = j.value("observations", 0L);
  r.witnesses = j.at("witnesses").get<std::vector<Vertex>>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  if (j.contains("measured"))
    for (const auto& [k, v] : j.at("measured").items())
      r.measured[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  return r;
}

}  // namespace npc
