#pragma once

// Run reports: JSON (canonical) and CSV. Schema: docs/report_schema.md.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "yamabe/flow/flow.hpp"
#include "yamabe/integrate/global.hpp"
#include "yamabe/lie/report.hpp"

#ifndef YAMABE_VERSION
#define YAMABE_VERSION "1.0.0"
#endif

namespace yamabe {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolName = "yamabe-lab";
inline constexpr const char* kToolVersion = YAMABE_VERSION;

using ojson = nlohmann::ordered_json;

inline ojson to_json(const ResidualStats& s) {
  return ojson{{"label", s.label},       {"tolerance", s.tolerance},   {"max_abs", s.max_abs},
               {"mean_abs", s.mean_abs}, {"max_scaled", s.max_scaled}, {"informational", s.informational},
               {"pass", s.pass}};
}

inline ojson to_json(const IdentityResidualReport& r) {
  ojson j;
  j["kind"] = "identity";
  j["id"] = r.id;
  j["subject"] = r.subject;
  j["grid"] = r.grid;
  j["points"] = r.points;
  j["failed_points"] = r.failed_points;
  j["failures"] = r.failures;
  j["entries"] = ojson::array();
  for (const auto& e : r.entries) j["entries"].push_back(to_json(e));
  j["metrics"] = ojson::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  j["pass"] = r.pass;
  return j;
}

inline ojson to_json(const GlobalCheck& c) {
  return ojson{{"label", c.label},
               {"value", c.value},
               {"normalization", c.normalization},
               {"relative", c.relative},
               {"error_estimate", c.error_estimate},
               {"tolerance", c.tolerance},
               {"pass", c.pass}};
}

inline ojson to_json(const GlobalReport& r) {
  ojson j;
  j["kind"] = "global";
  j["id"] = r.id;
  j["subject"] = r.subject;
  j["grid"] = r.grid;
  j["nodes"] = r.nodes;
  j["comparison_nodes"] = r.comparison_nodes;
  j["quantities"] = ojson::object();
  for (const auto& [k, v] : r.quantities) j["quantities"][k] = v;
  j["checks"] = ojson::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  j["precondition_failed"] = r.precondition_failed;
  j["preconditions"] = r.preconditions;
  j["soliton_type"] = r.soliton_type;
  j["pass"] = r.pass;
  return j;
}

/// Flow summary (the trajectory itself goes to CSV).
inline ojson to_json(const FlowTrajectory& tr, double dt) {
  ojson j;
  j["kind"] = "flow";
  j["id"] = "flow";
  j["n"] = tr.final_state.n;
  j["dt"] = dt;
  j["steps_taken"] = tr.steps_taken;
  j["t_final"] = tr.final_state.t;
  j["converged"] = tr.converged;
  j["max_abs_R"] = tr.max_abs_curvature();
  j["relative_area_drift"] = tr.relative_area_drift();
  j["r_final"] = tr.samples.back().r;
  j["area"] = tr.samples.back().area;
  return j;
}

/// Top-level document; `config` echoes every setting needed to rerun.
inline ojson make_run_report(const std::string& command, const ojson& config, const ojson& reports,
                             const std::string& verdict) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = kToolName;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;
  j["reports"] = reports;
  j["verdict"] = verdict;
  return j;
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// One row per entry or check of every report in a run document.
inline void write_report_csv(std::ostream& os, const ojson& run) {
  os << "report,subject,label,value,scaled,tolerance,informational,pass\n";
  for (const auto& r : run.at("reports")) {
    const std::string id = r.at("id").get<std::string>();
    const std::string subject = r.value("subject", "");
    const std::string kind = r.at("kind").get<std::string>();
    if (kind == "identity") {
      for (const auto& e : r.at("entries"))
        os << csv_field(id) << ',' << csv_field(subject) << ',' << csv_field(e.at("label").get<std::string>()) << ','
           << csv_number(e.at("max_abs")) << ',' << csv_number(e.at("max_scaled")) << ','
           << csv_number(e.at("tolerance")) << ',' << csv_number(e.at("informational")) << ','
           << csv_number(e.at("pass")) << '\n';
    } else if (kind == "global") {
      for (const auto& c : r.at("checks"))
        os << csv_field(id) << ',' << csv_field(subject) << ',' << csv_field(c.at("label").get<std::string>()) << ','
           << csv_number(c.at("value")) << ',' << csv_number(c.at("relative")) << ',' << csv_number(c.at("tolerance"))
           << ",false," << csv_number(c.at("pass")) << '\n';
      if (r.at("precondition_failed").get<bool>())
        for (const auto& p : r.at("preconditions"))
          os << csv_field(id) << ',' << csv_field(subject) << ',' << csv_field("precondition: " + p.get<std::string>())
             << ",,,,false,false\n";
    } else if (kind == "flow") {
      os << "flow,," << "max |R|," << csv_number(r.at("max_abs_R")) << ",,,false," << csv_number(r.at("converged"))
         << '\n';
      os << "flow,," << "relative area drift," << csv_number(r.at("relative_area_drift")) << ",,,true,true\n";
    }
  }
}

}  // namespace yamabe
