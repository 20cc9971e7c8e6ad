#pragma once

#include "tracekg/state_system.hpp"
#include "tracekg/trace_model.hpp"

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace tracekg {

/// Half-open analysis window [t1, t2).
struct Window {
    Timestamp t1 = 0;
    Timestamp t2 = 0;

    Duration length() const noexcept { return t2 - t1; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct ThreadCpuStat {
    Tid tid = 0;
    CpuId cpu = 0;
    Duration runtime = 0;
    std::uint64_t switch_in_count = 0;

    friend bool operator==(const ThreadCpuStat&, const ThreadCpuStat&) = default;
};

/// Per-(cpu, thread) runtimes inside one window, plus per-CPU busy time.
/// Idle (tid 0) never appears in `threads`; its share is `idle`.
struct StatTable {
    Window window;
    std::map<std::pair<CpuId, Tid>, ThreadCpuStat> threads;
    std::map<CpuId, Duration> busy;
    std::map<CpuId, Duration> idle;

    friend bool operator==(const StatTable&, const StatTable&) = default;
};

struct ThreadRuntime {
    Tid tid = 0;
    Duration runtime = 0;
    friend bool operator==(const ThreadRuntime&, const ThreadRuntime&) = default;
};

struct BusiestCpu {
    CpuId cpu = 0;
    Duration busy = 0;
    bool all_idle = false;
    friend bool operator==(const BusiestCpu&, const BusiestCpu&) = default;
};

/// Scheduling analytics over a sealed state system. CPUs are numbered
/// 0..cpu_count-1; a CPU that never appears in the trace is idle throughout.
/// Every ranking breaks ties toward the smallest id.
class Analytics {
public:
    /// `cpu_count` 0 means "highest CPU seen in the state system + 1".
    explicit Analytics(const StateSystem& state, std::uint32_t cpu_count = 0);

    const StateSystem& state() const noexcept { return *state_; }
    std::uint32_t cpu_count() const noexcept { return cpu_count_; }

    void check(Window w) const;
    StatTable stats(Window w) const;

    Duration cpu_time_of_thread_on_cpu(Tid tid, CpuId cpu, Window w) const;
    std::optional<ThreadRuntime> top_thread_on_cpu(CpuId cpu, Window w) const;
    std::size_t distinct_threads_on_cpu(CpuId cpu, Window w) const;
    Duration busy_time_of_cpu(CpuId cpu, Window w) const;
    BusiestCpu busiest_cpu(Window w) const;
    CpuId cpu_serving_most_distinct_threads(Window w) const;
    std::optional<CpuId> primary_cpu_of_thread(Tid tid, Window w) const;

private:
    std::vector<StateInterval> cpu_intervals(CpuId cpu, Window w) const;

    const StateSystem* state_;
    std::uint32_t cpu_count_;
};

/// Independent oracle: a linear scan of the raw events that tracks each CPU's
/// current thread and clips runs against the window. No state system involved.
/// Runs still open after the last event are closed at `w.t2`.
StatTable brute_force_replay(const std::vector<Event>& events, Window w, std::uint32_t cpu_count);

enum class TemporalLocation { start, mid, end };

std::string_view to_string(TemporalLocation loc) noexcept;
TemporalLocation parse_temporal_location(std::string_view text);

/// Trace margin used by window placement: 5 s, shrunk proportionally (L / 6)
/// for traces shorter than 30 s.
Duration placement_margin(const TraceMeta& meta);

/// start: [m, m+len)   mid: [L/2, L/2+len)   end: [L-m-len, L-m)
/// where L is the trace length and m the placement margin.
Window window_for_location(const TraceMeta& meta, TemporalLocation loc, Duration length);

} // namespace tracekg
