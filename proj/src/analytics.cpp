#include "tracekg/analytics.hpp"

#include "tracekg/error.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace tracekg {

Analytics::Analytics(const StateSystem& state, std::uint32_t cpu_count) : state_(&state), cpu_count_(cpu_count)
{
    if (!state.sealed()) {
        throw Error(Errc::precondition, "analytics require a sealed state system");
    }
    if (cpu_count_ == 0) {
        const auto cpus = state.known_cpus();
        cpu_count_ = cpus.empty() ? 0 : cpus.back() + 1;
    }
}

void Analytics::check(Window w) const
{
    if (w.t1 >= w.t2 || w.t2 > state_->seal_end()) {
        throw Error(Errc::range,
                    fmt::format("window [{}, {}) invalid for extent [0, {})", w.t1, w.t2, state_->seal_end()));
    }
}

std::vector<StateInterval> Analytics::cpu_intervals(CpuId cpu, Window w) const
{
    const auto quark = state_->find_quark(cpu_current_thread_path(cpu));
    if (!quark) {
        return {};
    }
    return state_->query_range(*quark, w.t1, w.t2);
}

StatTable Analytics::stats(Window w) const
{
    check(w);
    StatTable table;
    table.window = w;
    for (CpuId cpu = 0; cpu < cpu_count_; ++cpu) {
        Duration busy = 0;
        for (const auto& iv : cpu_intervals(cpu, w)) {
            if (!iv.value.is_int()) {
                continue;
            }
            const Tid tid = iv.value.as_int();
            auto& stat = table.threads[{cpu, tid}];
            stat.tid = tid;
            stat.cpu = cpu;
            stat.runtime += iv.end - iv.start;
            stat.switch_in_count += 1;
            busy += iv.end - iv.start;
        }
        table.busy[cpu] = busy;
        table.idle[cpu] = w.length() - busy;
    }
    return table;
}

Duration Analytics::cpu_time_of_thread_on_cpu(Tid tid, CpuId cpu, Window w) const
{
    check(w);
    Duration total = 0;
    for (const auto& iv : cpu_intervals(cpu, w)) {
        if (iv.value.is_int() && iv.value.as_int() == tid) {
            total += iv.end - iv.start;
        }
    }
    return total;
}

std::optional<ThreadRuntime> Analytics::top_thread_on_cpu(CpuId cpu, Window w) const
{
    check(w);
    std::map<Tid, Duration> runtimes;
    for (const auto& iv : cpu_intervals(cpu, w)) {
        if (iv.value.is_int()) {
            runtimes[iv.value.as_int()] += iv.end - iv.start;
        }
    }
    std::optional<ThreadRuntime> best;
    for (const auto& [tid, runtime] : runtimes) {
        // ascending tid order, so strict > keeps the smallest tid on ties
        if (!best || runtime > best->runtime) {
            best = ThreadRuntime{tid, runtime};
        }
    }
    return best;
}

std::size_t Analytics::distinct_threads_on_cpu(CpuId cpu, Window w) const
{
    check(w);
    std::vector<Tid> tids;
    for (const auto& iv : cpu_intervals(cpu, w)) {
        if (iv.value.is_int()) {
            tids.push_back(iv.value.as_int());
        }
    }
    std::sort(tids.begin(), tids.end());
    return static_cast<std::size_t>(std::unique(tids.begin(), tids.end()) - tids.begin());
}

Duration Analytics::busy_time_of_cpu(CpuId cpu, Window w) const
{
    check(w);
    Duration busy = 0;
    for (const auto& iv : cpu_intervals(cpu, w)) {
        if (iv.value.is_int()) {
            busy += iv.end - iv.start;
        }
    }
    return busy;
}

BusiestCpu Analytics::busiest_cpu(Window w) const
{
    check(w);
    BusiestCpu best{0, 0, true};
    for (CpuId cpu = 0; cpu < cpu_count_; ++cpu) {
        const Duration busy = busy_time_of_cpu(cpu, w);
        if (busy > best.busy) {
            best = BusiestCpu{cpu, busy, false};
        }
    }
    return best;
}

CpuId Analytics::cpu_serving_most_distinct_threads(Window w) const
{
    check(w);
    CpuId best = 0;
    std::size_t best_count = 0;
    for (CpuId cpu = 0; cpu < cpu_count_; ++cpu) {
        const auto count = distinct_threads_on_cpu(cpu, w);
        if (count > best_count) {
            best = cpu;
            best_count = count;
        }
    }
    return best;
}

std::optional<CpuId> Analytics::primary_cpu_of_thread(Tid tid, Window w) const
{
    check(w);
    std::optional<CpuId> best;
    Duration best_runtime = 0;
    for (CpuId cpu = 0; cpu < cpu_count_; ++cpu) {
        const Duration runtime = cpu_time_of_thread_on_cpu(tid, cpu, w);
        if (runtime > best_runtime) {
            best = cpu;
            best_runtime = runtime;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

namespace {

struct Run {
    Tid tid;
    Timestamp start;
    Timestamp end;
};

struct CpuReplay {
    Tid current = kIdleTid;
    Timestamp since = 0;
    std::optional<Run> pending;
};

} // namespace

StatTable brute_force_replay(const std::vector<Event>& events, Window w, std::uint32_t cpu_count)
{
    StatTable table;
    table.window = w;
    for (const auto& event : events) {
        cpu_count = std::max(cpu_count, event.cpu + 1);
    }
    std::vector<CpuReplay> cpus(cpu_count);
    for (CpuId c = 0; c < cpu_count; ++c) {
        table.busy[c] = 0;
    }

    auto commit = [&](CpuId cpu, const Run& run) {
        const Timestamp lo = std::max(run.start, w.t1);
        const Timestamp hi = std::min(run.end, w.t2);
        if (run.tid == kIdleTid || hi <= lo) {
            return;
        }
        auto& stat = table.threads[{cpu, run.tid}];
        stat.tid = run.tid;
        stat.cpu = cpu;
        stat.runtime += hi - lo;
        stat.switch_in_count += 1;
        table.busy[cpu] += hi - lo;
    };
    // Adjacent runs of the same thread (split only by a zero-length run of
    // another) count as one.
    auto push_run = [&](CpuId cpu, Run run) {
        auto& rep = cpus[cpu];
        if (rep.pending && rep.pending->tid == run.tid && rep.pending->end == run.start) {
            rep.pending->end = run.end;
            return;
        }
        if (rep.pending) {
            commit(cpu, *rep.pending);
        }
        rep.pending = run;
    };

    std::optional<Timestamp> last;
    for (const auto& event : events) {
        if (last && event.ts < *last) {
            throw Error(Errc::ordering, fmt::format("event at {} precedes previous event at {}", event.ts, *last));
        }
        last = event.ts;
        if (event.ts >= w.t2) {
            break;
        }
        if (event.kind != kSchedSwitch) {
            continue;
        }
        const auto sw = as_sched_switch(event);
        auto& rep = cpus[event.cpu];
        if (sw.next_tid == rep.current) {
            continue;
        }
        if (event.ts > rep.since) {
            push_run(event.cpu, Run{rep.current, rep.since, event.ts});
        }
        rep.current = sw.next_tid;
        rep.since = event.ts;
    }
    for (CpuId c = 0; c < cpu_count; ++c) {
        auto& rep = cpus[c];
        if (w.t2 > rep.since) {
            push_run(c, Run{rep.current, rep.since, w.t2});
        }
        if (rep.pending) {
            commit(c, *rep.pending);
        }
        table.idle[c] = w.length() - table.busy[c];
    }
    return table;
}

// ---------------------------------------------------------------------------

std::string_view to_string(TemporalLocation loc) noexcept
{
    switch (loc) {
    case TemporalLocation::start: return "start";
    case TemporalLocation::mid: return "mid";
    case TemporalLocation::end: return "end";
    }
    return "mid";
}

TemporalLocation parse_temporal_location(std::string_view text)
{
    if (text == "start") {
        return TemporalLocation::start;
    }
    if (text == "mid") {
        return TemporalLocation::mid;
    }
    if (text == "end") {
        return TemporalLocation::end;
    }
    throw Error(Errc::parse, fmt::format("unknown temporal location '{}'", text));
}

Duration placement_margin(const TraceMeta& meta)
{
    constexpr Duration kMargin = 5'000'000'000ULL;
    constexpr Duration kFullMarginLength = 30'000'000'000ULL;
    const Duration length = meta.end - meta.origin;
    return length >= kFullMarginLength ? kMargin : length / 6;
}

Window window_for_location(const TraceMeta& meta, TemporalLocation loc, Duration length)
{
    const Duration trace_length = meta.end - meta.origin;
    const Duration margin = placement_margin(meta);
    if (length == 0 || trace_length < length + 2 * margin) {
        throw Error(Errc::extent, fmt::format("trace of {} ns is too short for a {} ns window (margin {} ns)",
                                              trace_length, length, margin));
    }
    switch (loc) {
    case TemporalLocation::start:
        return Window{meta.origin + margin, meta.origin + margin + length};
    case TemporalLocation::mid: {
        const Timestamp mid = meta.origin + trace_length / 2;
        if (mid + length > meta.end) {
            throw Error(Errc::extent, fmt::format("a {} ns window starting at the midpoint overruns the trace end",
                                                  length));
        }
        return Window{mid, mid + length};
    }
    case TemporalLocation::end:
        return Window{meta.end - margin - length, meta.end - margin};
    }
    throw Error(Errc::precondition, "unknown temporal location");
}

} // namespace tracekg
