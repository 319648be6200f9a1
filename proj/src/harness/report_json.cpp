#include "xi_index/harness/report_json.hpp"

#include <cmath>
#include <ostream>

namespace xidx::harness {

namespace {

using nlohmann::json;

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json real_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json inputs_json(const InputDigest& d) {
  return json{{"seed", d.seed}, {"trial", d.trial}, {"dims", d.dims}, {"descriptor", d.descriptor}};
}

}  // namespace

json to_json(const VerificationReport& report, bool with_timing) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back(json{{"name", c.name},
                          {"lhs", complex_json(c.lhs)},
                          {"rhs", complex_json(c.rhs)},
                          {"residual", real_or_null(c.residual)},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed()}});
  }
  json values = json::object();
  for (const auto& [k, v] : report.values) values[k] = complex_json(v);
  json histories = json::object();
  for (const auto& [k, v] : report.histories) {
    json arr = json::array();
    for (double x : v) arr.push_back(real_or_null(x));
    histories[k] = std::move(arr);
  }

  json out{{"identity", report.identity},
           {"anchor", report.anchor},
           {"inputs", inputs_json(report.inputs)},
           {"passed", report.passed()}};
  if (const Check* w = report.worst()) {
    out["check"] = w->name;
    out["lhs"] = complex_json(w->lhs);
    out["rhs"] = complex_json(w->rhs);
    out["residual"] = real_or_null(w->residual);
    out["tolerance"] = w->tolerance;
  }
  out["checks"] = std::move(checks);
  out["values"] = std::move(values);
  out["histories"] = std::move(histories);
  out["notes"] = report.notes;
  out["warnings"] = report.warnings;
  if (with_timing) out["elapsed_ms"] = report.elapsed_ms;
  return out;
}

json error_record(const std::string& identity, const InputDigest& inputs, const std::string& kind,
                  const std::string& message) {
  return json{{"identity", identity}, {"inputs", inputs_json(inputs)}, {"passed", false},
              {"error", json{{"kind", kind}, {"message", message}}}};
}

void write_ndjson(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

}  // namespace xidx::harness
