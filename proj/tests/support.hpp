#pragma once

// Test-only generators and oracles. Nothing here calls into the state system
// or analytics, so they can check those modules independently.

#include "tracekg/error.hpp"
#include "tracekg/trace_model.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace tracekg::test {

/// Runs `fn` and returns the error category it raised, or nullopt.
template <class Fn>
std::optional<Errc> error_code_of(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

#define EXPECT_ERRC(stmt, errc) EXPECT_EQ(::tracekg::test::error_code_of([&] { (void)(stmt); }), (errc))

struct RandomTrace {
    std::vector<Event> events;
    Timestamp end = 0;
    std::uint32_t cpus = 0;
    std::vector<Tid> tids;
};

/// Random but valid scheduling history: a thread never runs on two CPUs at
/// once, every switch names the CPU's current thread as prev. Time steps may
/// be zero, and a few opaque events are mixed in.
inline RandomTrace random_trace(std::mt19937_64& rng, std::uint32_t cpus, std::uint32_t threads,
                                std::size_t max_events)
{
    RandomTrace out;
    out.cpus = cpus;
    for (std::uint32_t i = 0; i < threads; ++i) {
        out.tids.push_back(static_cast<Tid>(100 + 7 * i));
    }
    std::vector<Tid> current(cpus, kIdleTid);
    std::uniform_int_distribution<std::uint32_t> pick_cpu(0, cpus - 1);
    std::uniform_int_distribution<int> gap_kind(0, 9);
    std::uniform_int_distribution<Duration> small_gap(1, 50);
    std::uniform_int_distribution<Duration> big_gap(51, 5000);
    Timestamp t = std::uniform_int_distribution<Timestamp>(0, 100)(rng);
    const std::size_t count = std::uniform_int_distribution<std::size_t>(0, max_events)(rng);
    for (std::size_t i = 0; i < count; ++i) {
        const int g = gap_kind(rng);
        t += g == 0 ? 0 : g < 5 ? small_gap(rng) : big_gap(rng);
        const CpuId cpu = pick_cpu(rng);
        if (gap_kind(rng) == 0) {
            out.events.push_back(Event{t, "custom_probe", cpu, {{"x", PayloadValue{std::string("y")}}}});
            continue;
        }
        std::vector<Tid> candidates{kIdleTid};
        for (Tid tid : out.tids) {
            if (std::find(current.begin(), current.end(), tid) == current.end()) {
                candidates.push_back(tid);
            }
        }
        candidates.erase(std::remove(candidates.begin(), candidates.end(), current[cpu]), candidates.end());
        if (candidates.empty()) {
            continue;
        }
        const Tid next = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        out.events.push_back(make_sched_switch(t, cpu, current[cpu], next));
        current[cpu] = next;
    }
    out.end = t + std::uniform_int_distribution<Duration>(1, 1000)(rng);
    return out;
}

/// Thread on `cpu` at time `t` by replaying every switch with ts <= t.
inline Tid naive_thread_at(const std::vector<Event>& events, CpuId cpu, Timestamp t)
{
    Tid tid = kIdleTid;
    for (const auto& e : events) {
        if (e.ts > t) {
            break;
        }
        if (e.kind == kSchedSwitch && e.cpu == cpu) {
            tid = as_sched_switch(e).next_tid;
        }
    }
    return tid;
}

/// Per-(cpu, tid) runtime in [t1, t2) by walking every event boundary; runs
/// are closed at `end`.
inline std::map<std::pair<CpuId, Tid>, Duration> naive_runtimes(const std::vector<Event>& events, Timestamp end,
                                                                 Timestamp t1, Timestamp t2)
{
    std::map<CpuId, std::vector<std::pair<Timestamp, Tid>>> changes;
    for (const auto& e : events) {
        if (e.kind == kSchedSwitch) {
            changes[e.cpu].emplace_back(e.ts, as_sched_switch(e).next_tid);
        }
    }
    std::map<std::pair<CpuId, Tid>, Duration> out;
    for (auto& [cpu, list] : changes) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Timestamp start = list[i].first;
            const Timestamp stop = i + 1 < list.size() ? list[i + 1].first : end;
            const Timestamp a = std::max(start, t1);
            const Timestamp b = std::min(stop, t2);
            if (list[i].second != kIdleTid && a < b) {
                out[{cpu, list[i].second}] += b - a;
            }
        }
    }
    return out;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("tracekg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace tracekg::test
