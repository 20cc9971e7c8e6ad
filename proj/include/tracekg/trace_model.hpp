#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tracekg {

/// Nanoseconds since the trace origin.
using Timestamp = std::uint64_t;
/// A span of time in nanoseconds.
using Duration = std::uint64_t;
using CpuId = std::uint32_t;
using Tid = std::int64_t;

inline constexpr Tid kIdleTid = 0;
inline constexpr std::string_view kSchedSwitch = "sched_switch";

using PayloadValue = std::variant<std::int64_t, std::string>;
/// Payload fields in their original order.
using Payload = std::vector<std::pair<std::string, PayloadValue>>;

struct Event {
    Timestamp ts = 0;
    std::string kind;
    CpuId cpu = 0;
    Payload payload;

    const PayloadValue* field(std::string_view name) const;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SchedSwitch {
    Tid prev_tid = 0;
    Tid next_tid = 0;
};

Event make_sched_switch(Timestamp ts, CpuId cpu, Tid prev_tid, Tid next_tid);

/// Extracts and validates the payload of a `sched_switch` event.
/// Throws Error(parse) when the payload is not exactly {prev_tid, next_tid}
/// with non-negative, distinct integers.
SchedSwitch as_sched_switch(const Event& event);

struct TraceMeta {
    Timestamp origin = 0;
    Timestamp end = 0;
    std::uint64_t event_count = 0;
    std::uint32_t cpu_count = 0;

    friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

/// Parses one line of the event file format.
/// `line_number` only feeds error messages.
Event parse_event_line(std::string_view line, std::uint64_t line_number = 0);

/// Renders the canonical single-line form (no trailing newline).
std::string format_event_line(const Event& event);

/// Pull-based event stream. `next()` returns nullopt once exhausted.
class EventStream {
public:
    virtual ~EventStream() = default;
    virtual std::optional<Event> next() = 0;
};

class VectorEventStream final : public EventStream {
public:
    explicit VectorEventStream(std::vector<Event> events) : events_(std::move(events)) {}
    std::optional<Event> next() override;

private:
    std::vector<Event> events_;
    std::size_t pos_ = 0;
};

std::vector<Event> drain(EventStream& stream);

/// Streams events from a line-delimited JSON file. Validates ordering as it
/// reads; memory use does not depend on the trace length.
class TraceFileReader final : public EventStream {
public:
    explicit TraceFileReader(const std::filesystem::path& path);
    std::optional<Event> next() override;

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t line_number_ = 0;
    std::optional<Timestamp> last_ts_;
};

struct LoadedTrace {
    TraceMeta meta;
    std::unique_ptr<TraceFileReader> events;
};

/// Scans the file once to validate ordering and compute the metadata, then
/// hands back a fresh streaming reader over the same file.
LoadedTrace load_trace(const std::filesystem::path& path);

/// Computes metadata over an in-memory event list, enforcing ordering.
TraceMeta compute_meta(const std::vector<Event>& events);

void write_trace(std::ostream& out, EventStream& events);

struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::uint32_t cpu_count = 1;
    std::uint32_t thread_count = 1;
    Duration duration = 0;
    Duration mean_slice = 1;
    double skew = 0.0;
};

/// First synthetic thread id; synthetic threads are kFirstSyntheticTid + i.
inline constexpr Tid kFirstSyntheticTid = 1000;

void validate(const WorkloadSpec& spec);

/// The thread the generator favours on `cpu` when skew > 0.
Tid dominant_thread(const WorkloadSpec& spec, CpuId cpu);

/// splitmix64. Kept as an explicit algorithm so traces are reproducible
/// from the seed alone, independent of any standard-library engine.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); plain modulo reduction.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
    std::uint64_t state_;
};

/// Deterministic scheduling workload. The algorithm:
///
///   rng = SplitMix64(seed); every CPU starts idle with its first decision at 0.
///   Repeatedly take the CPU with the earliest pending decision (ties: lowest id).
///   At decision time t < duration:
///     u = rng.uniform()
///     if u < skew and the CPU's dominant thread is not running on another CPU:
///       pick = dominant
///     else:
///       candidates = [0] + ascending tids not running on another CPU
///       pick = candidates[rng.below(candidates.size())]
///     if pick != current: emit sched_switch(t, cpu, current, pick)
///     next decision = t + max(1, llround(-mean_slice * ln(1 - rng.uniform())))
///   Finally, every CPU still running a thread switches to idle at `duration`.
class SyntheticTraceGenerator final : public EventStream {
public:
    explicit SyntheticTraceGenerator(const WorkloadSpec& spec);
    std::optional<Event> next() override;

private:
    bool running_elsewhere(Tid tid, CpuId cpu) const;
    Duration draw_slice();

    WorkloadSpec spec_;
    SplitMix64 rng_;
    std::vector<Tid> current_;
    std::vector<Timestamp> next_decision_;
    bool closing_ = false;
    CpuId closing_cpu_ = 0;
};

std::vector<Event> generate_synthetic_trace(const WorkloadSpec& spec);

/// Restricts a stream to [t1, t2). When the window opens while a CPU is busy,
/// a synthetic `sched_switch` from idle to the running thread is emitted at
/// t1 so that replaying the slice sees the right initial occupancy.
class SliceEventStream final : public EventStream {
public:
    SliceEventStream(EventStream& source, Timestamp t1, Timestamp t2);
    std::optional<Event> next() override;

private:
    void prime();

    EventStream& source_;
    Timestamp t1_;
    Timestamp t2_;
    bool primed_ = false;
    bool done_ = false;
    std::vector<Event> pending_;
    std::size_t pending_pos_ = 0;
};

std::vector<Event> slice_trace(const std::vector<Event>& events, Timestamp t1, Timestamp t2);

} // namespace tracekg
