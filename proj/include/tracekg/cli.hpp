#pragma once

#include "tracekg/trace_model.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tracekg {

/// "250", "250ns", "1.5us", "10ms", "30s", "2m" -> nanoseconds. A bare
/// number is nanoseconds. Throws Error(parse).
Duration parse_duration(std::string_view text);

/// "30s:40s" -> {30 s, 40 s} in nanoseconds.
std::pair<Timestamp, Timestamp> parse_time_range(std::string_view text);

/// Entry point behind the `tracekg` binary. `args[0]` is the program name.
/// Exit codes: 0 success, 1 runtime error, 2 usage error. The effective
/// configuration banner goes to `err`, results to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tracekg
