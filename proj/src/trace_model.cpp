#include "tracekg/trace_model.hpp"

#include "tracekg/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include "json.hpp"

namespace tracekg {

using ordered_json = nlohmann::ordered_json;

const PayloadValue* Event::field(std::string_view name) const
{
    for (const auto& [key, value] : payload) {
        if (key == name) {
            return &value;
        }
    }
    return nullptr;
}

Event make_sched_switch(Timestamp ts, CpuId cpu, Tid prev_tid, Tid next_tid)
{
    return Event{ts, std::string(kSchedSwitch), cpu,
                 Payload{{"prev_tid", prev_tid}, {"next_tid", next_tid}}};
}

SchedSwitch as_sched_switch(const Event& event)
{
    if (event.payload.size() != 2) {
        throw Error(Errc::parse, "sched_switch payload must contain exactly prev_tid and next_tid");
    }
    auto tid_field = [&](std::string_view name) -> Tid {
        const auto* value = event.field(name);
        if (value == nullptr) {
            throw Error(Errc::parse, fmt::format("sched_switch payload missing '{}'", name));
        }
        const auto* tid = std::get_if<std::int64_t>(value);
        if (tid == nullptr || *tid < 0) {
            throw Error(Errc::parse, fmt::format("sched_switch '{}' must be a non-negative integer", name));
        }
        return *tid;
    };
    SchedSwitch sw{tid_field("prev_tid"), tid_field("next_tid")};
    if (sw.prev_tid == sw.next_tid) {
        throw Error(Errc::parse, fmt::format("sched_switch prev_tid equals next_tid ({})", sw.prev_tid));
    }
    return sw;
}

namespace {

std::string where(std::uint64_t line_number)
{
    return line_number == 0 ? std::string("event") : fmt::format("line {}", line_number);
}

} // namespace

Event parse_event_line(std::string_view line, std::uint64_t line_number)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::parse, fmt::format("{}: malformed JSON ({})", where(line_number), e.what()));
    }
    if (!doc.is_object()) {
        throw Error(Errc::parse, fmt::format("{}: record is not a JSON object", where(line_number)));
    }
    static constexpr std::string_view keys[] = {"ts", "kind", "cpu", "payload"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(std::begin(keys), std::end(keys), key) == std::end(keys)) {
            throw Error(Errc::parse, fmt::format("{}: unexpected key '{}'", where(line_number), key));
        }
    }
    for (auto key : keys) {
        if (!doc.contains(key)) {
            throw Error(Errc::parse, fmt::format("{}: missing key '{}'", where(line_number), key));
        }
    }

    Event event;
    const auto& ts = doc["ts"];
    if (ts.is_number_integer() && !ts.is_number_unsigned() && ts.get<std::int64_t>() < 0) {
        throw Error(Errc::range, fmt::format("{}: negative timestamp {}", where(line_number), ts.get<std::int64_t>()));
    }
    if (!ts.is_number_integer()) {
        throw Error(Errc::parse, fmt::format("{}: 'ts' must be an integer", where(line_number)));
    }
    event.ts = ts.get<std::uint64_t>();

    const auto& kind = doc["kind"];
    if (!kind.is_string() || kind.get_ref<const std::string&>().empty()) {
        throw Error(Errc::parse, fmt::format("{}: 'kind' must be a non-empty string", where(line_number)));
    }
    event.kind = kind.get<std::string>();

    const auto& cpu = doc["cpu"];
    if (!cpu.is_number_integer() || (!cpu.is_number_unsigned() && cpu.get<std::int64_t>() < 0)
        || cpu.get<std::uint64_t>() > 0xFFFFFFFFULL) {
        throw Error(Errc::parse, fmt::format("{}: 'cpu' must be a small non-negative integer", where(line_number)));
    }
    event.cpu = cpu.get<CpuId>();

    const auto& payload = doc["payload"];
    if (!payload.is_object()) {
        throw Error(Errc::parse, fmt::format("{}: 'payload' must be an object", where(line_number)));
    }
    for (const auto& [key, value] : payload.items()) {
        if (value.is_number_integer()) {
            if (value.is_number_unsigned() && value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
                throw Error(Errc::parse, fmt::format("{}: payload field '{}' out of range", where(line_number), key));
            }
            event.payload.emplace_back(key, value.get<std::int64_t>());
        } else if (value.is_string()) {
            event.payload.emplace_back(key, value.get<std::string>());
        } else {
            throw Error(Errc::parse,
                        fmt::format("{}: payload field '{}' must be an integer or string", where(line_number), key));
        }
    }

    if (event.kind == kSchedSwitch) {
        try {
            as_sched_switch(event);
        } catch (const Error& e) {
            throw Error(Errc::parse, fmt::format("{}: {}", where(line_number), e.what()));
        }
    }
    return event;
}

std::string format_event_line(const Event& event)
{
    ordered_json doc;
    doc["ts"] = event.ts;
    doc["kind"] = event.kind;
    doc["cpu"] = event.cpu;
    ordered_json payload = ordered_json::object();
    for (const auto& [key, value] : event.payload) {
        std::visit([&, &k = key](const auto& v) { payload[k] = v; }, value);
    }
    doc["payload"] = std::move(payload);
    return doc.dump();
}

std::optional<Event> VectorEventStream::next()
{
    if (pos_ >= events_.size()) {
        return std::nullopt;
    }
    return events_[pos_++];
}

std::vector<Event> drain(EventStream& stream)
{
    std::vector<Event> out;
    while (auto event = stream.next()) {
        out.push_back(std::move(*event));
    }
    return out;
}

TraceFileReader::TraceFileReader(const std::filesystem::path& path) : path_(path), in_(path)
{
    if (!in_) {
        throw Error(Errc::io, fmt::format("cannot open trace file '{}'", path.string()));
    }
}

std::optional<Event> TraceFileReader::next()
{
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (line.empty()) {
            continue;
        }
        Event event = parse_event_line(line, line_number_);
        if (last_ts_ && event.ts < *last_ts_) {
            throw Error(Errc::ordering, fmt::format("{}: line {}: timestamp {} precedes previous {}",
                                                    path_.string(), line_number_, event.ts, *last_ts_));
        }
        last_ts_ = event.ts;
        return event;
    }
    if (in_.bad()) {
        throw Error(Errc::io, fmt::format("read failure on '{}'", path_.string()));
    }
    return std::nullopt;
}

LoadedTrace load_trace(const std::filesystem::path& path)
{
    TraceMeta meta;
    {
        TraceFileReader scan(path);
        while (auto event = scan.next()) {
            ++meta.event_count;
            meta.end = event->ts;
            meta.cpu_count = std::max(meta.cpu_count, event->cpu + 1);
        }
    }
    return LoadedTrace{meta, std::make_unique<TraceFileReader>(path)};
}

TraceMeta compute_meta(const std::vector<Event>& events)
{
    TraceMeta meta;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && events[i].ts < events[i - 1].ts) {
            throw Error(Errc::ordering,
                        fmt::format("record {}: timestamp {} precedes previous {}", i + 1, events[i].ts, events[i - 1].ts));
        }
        meta.end = events[i].ts;
        meta.cpu_count = std::max(meta.cpu_count, events[i].cpu + 1);
    }
    meta.event_count = events.size();
    return meta;
}

void write_trace(std::ostream& out, EventStream& events)
{
    while (auto event = events.next()) {
        out << format_event_line(*event) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic workloads

void validate(const WorkloadSpec& spec)
{
    if (spec.cpu_count < 1) {
        throw Error(Errc::spec, "cpu_count must be >= 1");
    }
    if (spec.thread_count < 1) {
        throw Error(Errc::spec, "thread_count must be >= 1");
    }
    if (spec.mean_slice == 0) {
        throw Error(Errc::spec, "mean_slice must be > 0");
    }
    if (spec.duration < spec.mean_slice) {
        throw Error(Errc::spec, fmt::format("duration {} ns is shorter than mean_slice {} ns", spec.duration,
                                            spec.mean_slice));
    }
    if (!(spec.skew >= 0.0 && spec.skew <= 1.0)) {
        throw Error(Errc::spec, "skew must lie in [0, 1]");
    }
}

Tid dominant_thread(const WorkloadSpec& spec, CpuId cpu)
{
    return kFirstSyntheticTid + static_cast<Tid>(cpu % spec.thread_count);
}

SyntheticTraceGenerator::SyntheticTraceGenerator(const WorkloadSpec& spec)
    : spec_(spec), rng_(spec.seed), current_(spec.cpu_count, kIdleTid), next_decision_(spec.cpu_count, 0)
{
    validate(spec);
}

bool SyntheticTraceGenerator::running_elsewhere(Tid tid, CpuId cpu) const
{
    for (CpuId c = 0; c < spec_.cpu_count; ++c) {
        if (c != cpu && current_[c] == tid) {
            return true;
        }
    }
    return false;
}

Duration SyntheticTraceGenerator::draw_slice()
{
    const double u = rng_.uniform();
    const double length = -static_cast<double>(spec_.mean_slice) * std::log(1.0 - u);
    return std::max<Duration>(1, static_cast<Duration>(std::llround(length)));
}

std::optional<Event> SyntheticTraceGenerator::next()
{
    while (!closing_) {
        const auto it = std::min_element(next_decision_.begin(), next_decision_.end());
        const auto cpu = static_cast<CpuId>(it - next_decision_.begin());
        const Timestamp t = *it;
        if (t >= spec_.duration) {
            closing_ = true;
            break;
        }

        const Tid dominant = dominant_thread(spec_, cpu);
        Tid pick = kIdleTid;
        if (rng_.uniform() < spec_.skew && !running_elsewhere(dominant, cpu)) {
            pick = dominant;
        } else {
            std::vector<Tid> candidates{kIdleTid};
            for (std::uint32_t i = 0; i < spec_.thread_count; ++i) {
                const Tid tid = kFirstSyntheticTid + static_cast<Tid>(i);
                if (!running_elsewhere(tid, cpu)) {
                    candidates.push_back(tid);
                }
            }
            pick = candidates[rng_.below(candidates.size())];
        }

        const Tid prev = current_[cpu];
        next_decision_[cpu] = t + draw_slice();
        if (pick != prev) {
            current_[cpu] = pick;
            return make_sched_switch(t, cpu, prev, pick);
        }
    }
    while (closing_cpu_ < spec_.cpu_count) {
        const CpuId cpu = closing_cpu_++;
        if (current_[cpu] != kIdleTid) {
            const Tid prev = current_[cpu];
            current_[cpu] = kIdleTid;
            return make_sched_switch(spec_.duration, cpu, prev, kIdleTid);
        }
    }
    return std::nullopt;
}

std::vector<Event> generate_synthetic_trace(const WorkloadSpec& spec)
{
    SyntheticTraceGenerator gen(spec);
    return drain(gen);
}

// ---------------------------------------------------------------------------
// Slicing

SliceEventStream::SliceEventStream(EventStream& source, Timestamp t1, Timestamp t2)
    : source_(source), t1_(t1), t2_(t2)
{
    if (t1 >= t2) {
        throw Error(Errc::precondition, fmt::format("slice window [{}, {}) is empty", t1, t2));
    }
}

void SliceEventStream::prime()
{
    primed_ = true;
    std::map<CpuId, Tid> occupancy;
    std::optional<Event> first;
    while (auto event = source_.next()) {
        if (event->ts >= t1_) {
            first = std::move(event);
            break;
        }
        if (event->kind == kSchedSwitch) {
            occupancy[event->cpu] = as_sched_switch(*event).next_tid;
        }
    }
    for (const auto& [cpu, tid] : occupancy) {
        if (tid != kIdleTid) {
            pending_.push_back(make_sched_switch(t1_, cpu, kIdleTid, tid));
        }
    }
    if (first && first->ts < t2_) {
        pending_.push_back(std::move(*first));
    } else {
        done_ = true;
    }
}

std::optional<Event> SliceEventStream::next()
{
    if (!primed_) {
        prime();
    }
    if (pending_pos_ < pending_.size()) {
        return std::move(pending_[pending_pos_++]);
    }
    if (done_) {
        return std::nullopt;
    }
    auto event = source_.next();
    if (!event || event->ts >= t2_) {
        done_ = true;
        return std::nullopt;
    }
    return event;
}

std::vector<Event> slice_trace(const std::vector<Event>& events, Timestamp t1, Timestamp t2)
{
    VectorEventStream source(events);
    SliceEventStream slice(source, t1, t2);
    return drain(slice);
}

} // namespace tracekg
