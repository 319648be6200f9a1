#pragma once

// NDJSON serialization of verification reports. Complex numbers are written
// as [re, im]; non-finite residuals as null.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "xi_index/report.hpp"

namespace xidx::harness {

/// One report as a JSON object. `with_timing` = false drops elapsed_ms so
/// payloads of identical runs compare equal.
nlohmann::json to_json(const VerificationReport& report, bool with_timing = true);

/// Record for a trial that raised instead of producing a report.
nlohmann::json error_record(const std::string& identity, const InputDigest& inputs, const std::string& kind,
                            const std::string& message);

/// Writes `record` as a single line.
void write_ndjson(std::ostream& out, const nlohmann::json& record);

}  // namespace xidx::harness
