#include "tracekg/error.hpp"

namespace tracekg {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::parse: return "parse";
    case Errc::range: return "range";
    case Errc::ordering: return "ordering";
    case Errc::io: return "io";
    case Errc::spec: return "spec";
    case Errc::sealed: return "sealed";
    case Errc::lookup: return "lookup";
    case Errc::precondition: return "precondition";
    case Errc::extent: return "extent";
    case Errc::item_schema: return "item-schema";
    case Errc::format: return "format";
    case Errc::validation: return "validation";
    case Errc::credential: return "credential";
    case Errc::transport: return "transport";
    case Errc::context_limit: return "context-limit";
    case Errc::cache_miss: return "cache-miss";
    case Errc::domain: return "domain";
    }
    return "unknown";
}

} // namespace tracekg
