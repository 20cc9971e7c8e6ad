#include "tracekg/state_system.hpp"

#include "tracekg/error.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include "json.hpp"

namespace tracekg {

AttributePath::AttributePath(std::vector<std::string> segments) : segments_(std::move(segments))
{
    for (const auto& seg : segments_) {
        if (seg.empty() || seg.find('/') != std::string::npos) {
            throw Error(Errc::parse, fmt::format("invalid attribute path segment '{}'", seg));
        }
    }
}

AttributePath AttributePath::parse(std::string_view text)
{
    if (text.empty() || text.front() != '/') {
        throw Error(Errc::parse, fmt::format("attribute path '{}' must start with '/'", text));
    }
    std::vector<std::string> segments;
    std::size_t pos = 1;
    while (pos <= text.size()) {
        const auto slash = text.find('/', pos);
        const auto stop = slash == std::string_view::npos ? text.size() : slash;
        if (stop == pos) {
            throw Error(Errc::parse, fmt::format("attribute path '{}' has an empty segment", text));
        }
        segments.emplace_back(text.substr(pos, stop - pos));
        pos = stop + 1;
    }
    return AttributePath(std::move(segments));
}

std::string AttributePath::str() const
{
    std::string out;
    for (const auto& seg : segments_) {
        out += '/';
        out += seg;
    }
    return out;
}

AttributePath cpu_current_thread_path(CpuId cpu)
{
    return AttributePath({"CPUs", std::to_string(cpu), "Current_thread"});
}

AttributePath thread_status_path(Tid tid)
{
    return AttributePath({"Threads", std::to_string(tid), "Status"});
}

std::string StateValue::to_text() const
{
    if (is_null()) {
        return "null";
    }
    if (is_int()) {
        return std::to_string(as_int());
    }
    return as_string();
}

// ---------------------------------------------------------------------------

StateSystem::StateSystem()
{
    register_handler(std::string(kSchedSwitch), handle_sched_switch);
}

Quark StateSystem::get_or_create_quark(const AttributePath& path)
{
    const auto key = path.str();
    if (auto it = index_.find(key); it != index_.end()) {
        return it->second;
    }
    if (sealed_) {
        throw Error(Errc::sealed, fmt::format("cannot create quark for '{}' after seal", key));
    }
    const auto quark = static_cast<Quark>(paths_.size());
    paths_.push_back(path);
    histories_.emplace_back();
    index_.emplace(key, quark);
    return quark;
}

std::optional<Quark> StateSystem::find_quark(const AttributePath& path) const
{
    if (auto it = index_.find(path.str()); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

const AttributePath& StateSystem::path_of(Quark quark) const
{
    if (quark >= paths_.size()) {
        throw Error(Errc::lookup, fmt::format("unknown quark {}", quark));
    }
    return paths_[quark];
}

const StateSystem::History& StateSystem::history(Quark quark) const
{
    if (quark >= histories_.size()) {
        throw Error(Errc::lookup, fmt::format("unknown quark {}", quark));
    }
    return histories_[quark];
}

void StateSystem::modify_attribute(Quark quark, const StateValue& value, Timestamp at)
{
    if (sealed_) {
        throw Error(Errc::sealed, "cannot modify a sealed state system");
    }
    history(quark);
    auto& h = histories_[quark];
    if (!h.open) {
        h.open = Segment{at, at, value};
        return;
    }
    auto& open = *h.open;
    if (at < open.start) {
        throw Error(Errc::ordering, fmt::format("modify of quark {} at {} precedes its open value at {}", quark, at,
                                                open.start));
    }
    if (open.value == value) {
        return;
    }
    if (at == open.start) {
        // Zero-length runs are never stored: overwrite in place, and re-join
        // the previous run if that makes two equal neighbours.
        open.value = value;
        if (!h.closed.empty() && h.closed.back().end == at && h.closed.back().value == value) {
            open.start = h.closed.back().start;
            h.closed.pop_back();
        }
        return;
    }
    h.closed.push_back(Segment{open.start, at, std::move(open.value)});
    open = Segment{at, at, value};
}

void StateSystem::register_handler(std::string kind, Handler handler)
{
    handlers_[std::move(kind)] = std::move(handler);
}

void StateSystem::apply_event(const Event& event)
{
    if (sealed_) {
        throw Error(Errc::sealed, "cannot apply events to a sealed state system");
    }
    if (applied_events_ + skipped_events_ > 0 && event.ts < last_event_ts_) {
        throw Error(Errc::ordering, fmt::format("event at {} precedes previous event at {}", event.ts, last_event_ts_));
    }
    last_event_ts_ = event.ts;
    auto it = handlers_.find(event.kind);
    if (it == handlers_.end()) {
        ++skipped_events_;
        return;
    }
    it->second(*this, event);
    ++applied_events_;
}

void StateSystem::apply_all(EventStream& events)
{
    while (auto event = events.next()) {
        apply_event(*event);
    }
}

SealResult StateSystem::seal(Timestamp end)
{
    if (sealed_) {
        return SealResult::already_sealed;
    }
    if (applied_events_ + skipped_events_ > 0 && end < last_event_ts_) {
        throw Error(Errc::ordering, fmt::format("seal at {} precedes last event at {}", end, last_event_ts_));
    }
    for (std::size_t q = 0; q < histories_.size(); ++q) {
        if (histories_[q].open && end < histories_[q].open->start) {
            throw Error(Errc::ordering, fmt::format("seal at {} precedes open value of quark {} at {}", end, q,
                                                    histories_[q].open->start));
        }
    }
    for (auto& h : histories_) {
        if (h.open) {
            if (end > h.open->start) {
                h.closed.push_back(Segment{h.open->start, end, std::move(h.open->value)});
            }
            h.open.reset();
        }
    }
    sealed_ = true;
    seal_end_ = end;
    return SealResult::sealed;
}

void StateSystem::require_sealed() const
{
    if (!sealed_) {
        throw Error(Errc::precondition, "state system must be sealed before querying");
    }
}

StateValue StateSystem::query_point(Quark quark, Timestamp t, QueryProbe* probe) const
{
    require_sealed();
    const auto& closed = history(quark).closed;
    if (t >= seal_end_) {
        throw Error(Errc::range, fmt::format("time {} outside extent [0, {})", t, seal_end_));
    }
    // upper_bound on start: first segment starting after t.
    std::size_t lo = 0;
    std::size_t hi = closed.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (probe != nullptr) {
            ++probe->comparisons;
        }
        if (closed[mid].start <= t) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == 0) {
        return StateValue::null();
    }
    const auto& seg = closed[lo - 1];
    return t < seg.end ? seg.value : StateValue::null();
}

void StateSystem::check_window(Timestamp t1, Timestamp t2) const
{
    if (t1 >= t2 || t2 > seal_end_) {
        throw Error(Errc::range, fmt::format("window [{}, {}) invalid for extent [0, {})", t1, t2, seal_end_));
    }
}

std::vector<StateInterval> StateSystem::query_range(Quark quark, Timestamp t1, Timestamp t2) const
{
    require_sealed();
    const auto& closed = history(quark).closed;
    check_window(t1, t2);
    auto it = std::partition_point(closed.begin(), closed.end(), [&](const Segment& s) { return s.end <= t1; });
    std::vector<StateInterval> out;
    for (; it != closed.end() && it->start < t2; ++it) {
        out.push_back(StateInterval{std::max(it->start, t1), std::min(it->end, t2), quark, it->value});
    }
    return out;
}

std::vector<StateInterval> StateSystem::intervals(Quark quark) const
{
    std::vector<StateInterval> out;
    for (const auto& seg : history(quark).closed) {
        out.push_back(StateInterval{seg.start, seg.end, quark, seg.value});
    }
    return out;
}

std::size_t StateSystem::interval_count(Quark quark) const
{
    return history(quark).closed.size();
}

std::vector<CpuId> StateSystem::known_cpus() const
{
    std::vector<CpuId> cpus;
    for (const auto& path : paths_) {
        const auto& seg = path.segments();
        if (seg.size() == 3 && seg[0] == "CPUs" && seg[2] == "Current_thread") {
            CpuId cpu = 0;
            const auto* first = seg[1].data();
            const auto* last = first + seg[1].size();
            if (auto [p, ec] = std::from_chars(first, last, cpu); ec == std::errc() && p == last) {
                cpus.push_back(cpu);
            }
        }
    }
    std::sort(cpus.begin(), cpus.end());
    return cpus;
}

std::string StateSystem::snapshot_json() const
{
    using ordered_json = nlohmann::ordered_json;
    ordered_json doc;
    doc["quarks"] = ordered_json::array();
    doc["intervals"] = ordered_json::array();
    for (Quark q = 0; q < paths_.size(); ++q) {
        doc["quarks"].push_back(ordered_json{{"id", q}, {"path", paths_[q].str()}});
    }
    for (Quark q = 0; q < histories_.size(); ++q) {
        for (const auto& seg : histories_[q].closed) {
            ordered_json rec{{"q", q}, {"start", seg.start}, {"end", seg.end}};
            if (seg.value.is_null()) {
                rec["value"] = nullptr;
            } else if (seg.value.is_int()) {
                rec["value"] = seg.value.as_int();
            } else {
                rec["value"] = seg.value.as_string();
            }
            doc["intervals"].push_back(std::move(rec));
        }
    }
    return doc.dump();
}

void handle_sched_switch(StateSystem& state, const Event& event)
{
    const auto sw = as_sched_switch(event);
    const Quark cpu = state.get_or_create_quark(cpu_current_thread_path(event.cpu));
    if (sw.prev_tid != kIdleTid) {
        const Quark prev = state.get_or_create_quark(thread_status_path(sw.prev_tid));
        state.modify_attribute(prev, StateValue::string(std::string(kStatusWaiting)), event.ts);
    }
    if (sw.next_tid != kIdleTid) {
        const Quark next = state.get_or_create_quark(thread_status_path(sw.next_tid));
        state.modify_attribute(next, StateValue::string(std::string(kStatusRunning)), event.ts);
        state.modify_attribute(cpu, StateValue::integer(sw.next_tid), event.ts);
    } else {
        state.modify_attribute(cpu, StateValue::null(), event.ts);
    }
}

StateSystem build_state_system(EventStream& events, Timestamp end)
{
    StateSystem state;
    state.apply_all(events);
    state.seal(end);
    return state;
}

StateSystem build_state_system(const std::vector<Event>& events, Timestamp end)
{
    StateSystem state;
    for (const auto& event : events) {
        state.apply_event(event);
    }
    state.seal(end);
    return state;
}

} // namespace tracekg
