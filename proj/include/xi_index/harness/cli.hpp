#pragma once

#include <iosfwd>

namespace xidx::harness {

/// Entry point of the xi_index tool. Returns 0 when every identity passed,
/// 1 on an identity failure or error record, 2 on usage/config errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xidx::harness
