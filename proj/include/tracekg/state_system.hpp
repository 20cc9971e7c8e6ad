#pragma once

#include "tracekg/trace_model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace tracekg {

using Quark = std::uint32_t;

/// Hierarchical attribute path such as `/CPUs/0/Current_thread`.
class AttributePath {
public:
    AttributePath() = default;
    explicit AttributePath(std::vector<std::string> segments);

    /// Parses `/a/b/c`. Throws Error(parse) on empty segments or a missing
    /// leading slash.
    static AttributePath parse(std::string_view text);

    const std::vector<std::string>& segments() const noexcept { return segments_; }
    std::string str() const;

    friend bool operator==(const AttributePath&, const AttributePath&) = default;

private:
    std::vector<std::string> segments_;
};

AttributePath cpu_current_thread_path(CpuId cpu);
AttributePath thread_status_path(Tid tid);

inline constexpr std::string_view kStatusRunning = "RUNNING";
inline constexpr std::string_view kStatusWaiting = "WAITING";

/// Null | Int | Str. Null means "no value" (an idle CPU, an unwritten attribute).
class StateValue {
public:
    StateValue() = default;
    static StateValue null() { return StateValue(); }
    static StateValue integer(std::int64_t v) { return StateValue(v); }
    static StateValue string(std::string v) { return StateValue(std::move(v)); }

    bool is_null() const noexcept { return std::holds_alternative<std::monostate>(value_); }
    bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(value_); }
    bool is_string() const noexcept { return std::holds_alternative<std::string>(value_); }

    std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
    const std::string& as_string() const { return std::get<std::string>(value_); }

    /// `null`, the integer, or the bare string.
    std::string to_text() const;

    friend bool operator==(const StateValue&, const StateValue&) = default;

private:
    explicit StateValue(std::int64_t v) : value_(v) {}
    explicit StateValue(std::string v) : value_(std::move(v)) {}

    std::variant<std::monostate, std::int64_t, std::string> value_;
};

struct StateInterval {
    Timestamp start = 0; ///< inclusive
    Timestamp end = 0;   ///< exclusive
    Quark quark = 0;
    StateValue value;

    friend bool operator==(const StateInterval&, const StateInterval&) = default;
};

enum class SealResult { sealed, already_sealed };

/// Counts key comparisons made by a point query; lets callers check the
/// logarithmic cost bound directly.
struct QueryProbe {
    std::uint64_t comparisons = 0;
};

/// The quark registry plus per-quark interval history.
///
/// Built single-threaded in event order, then sealed. After `seal` the object
/// is immutable and every const member is safe to call concurrently.
class StateSystem {
public:
    using Handler = std::function<void(StateSystem&, const Event&)>;

    /// Registers the built-in `sched_switch` handler.
    StateSystem();

    Quark get_or_create_quark(const AttributePath& path);
    std::optional<Quark> find_quark(const AttributePath& path) const;
    const AttributePath& path_of(Quark quark) const;
    std::size_t quark_count() const noexcept { return paths_.size(); }

    void modify_attribute(Quark quark, const StateValue& value, Timestamp at);

    void register_handler(std::string kind, Handler handler);
    void apply_event(const Event& event);
    void apply_all(EventStream& events);
    std::uint64_t skipped_events() const noexcept { return skipped_events_; }
    std::uint64_t applied_events() const noexcept { return applied_events_; }

    SealResult seal(Timestamp end);
    bool sealed() const noexcept { return sealed_; }
    Timestamp origin() const noexcept { return 0; }
    Timestamp seal_end() const noexcept { return seal_end_; }

    StateValue query_point(Quark quark, Timestamp t, QueryProbe* probe = nullptr) const;
    std::vector<StateInterval> query_range(Quark quark, Timestamp t1, Timestamp t2) const;

    /// Full stored history of a quark (closed intervals only before seal).
    std::vector<StateInterval> intervals(Quark quark) const;
    std::size_t interval_count(Quark quark) const;

    /// CPU ids that own a `/CPUs/{n}/Current_thread` quark, ascending.
    std::vector<CpuId> known_cpus() const;

    /// {"quarks":[{id,path}],"intervals":[{q,start,end,value}]}
    std::string snapshot_json() const;

private:
    struct Segment {
        Timestamp start;
        Timestamp end;
        StateValue value;
    };
    struct History {
        std::vector<Segment> closed;
        std::optional<Segment> open; // `end` unused while open
    };

    void require_sealed() const;
    const History& history(Quark quark) const;
    void check_window(Timestamp t1, Timestamp t2) const;

    std::vector<AttributePath> paths_;
    std::unordered_map<std::string, Quark> index_;
    std::vector<History> histories_;
    std::map<std::string, Handler, std::less<>> handlers_;
    std::uint64_t skipped_events_ = 0;
    std::uint64_t applied_events_ = 0;
    Timestamp last_event_ts_ = 0;
    bool sealed_ = false;
    Timestamp seal_end_ = 0;
};

/// Default handler: updates `/CPUs/{cpu}/Current_thread` and the
/// `/Threads/{tid}/Status` of both threads involved.
void handle_sched_switch(StateSystem& state, const Event& event);

/// Applies the whole stream and seals at `end`.
StateSystem build_state_system(EventStream& events, Timestamp end);
StateSystem build_state_system(const std::vector<Event>& events, Timestamp end);

} // namespace tracekg
