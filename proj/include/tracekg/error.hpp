#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracekg {

enum class Errc {
    parse,
    range,
    ordering,
    io,
    spec,
    sealed,
    lookup,
    precondition,
    extent,
    item_schema,
    format,
    validation,
    credential,
    transport,
    context_limit,
    cache_miss,
    domain,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the error categories
/// above so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace tracekg
