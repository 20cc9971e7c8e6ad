#pragma once

#include "tracekg/analytics.hpp"
#include "tracekg/knowledge_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tracekg {

enum class AnswerFormat { explanatory, multiple_choice, true_false };
enum class HopScope { single, multi };

std::string_view to_string(AnswerFormat f) noexcept;
std::string_view to_string(HopScope h) noexcept;
AnswerFormat parse_answer_format(std::string_view text);
HopScope parse_hop_scope(std::string_view text);

// ---------------------------------------------------------------------------
// Oracle queries: the analytics operation behind a reference answer.

enum class QueryOp {
    cpu_time,                 ///< tid, cpu -> ns
    busy_time,                ///< cpu -> ns
    distinct_threads,         ///< cpu -> count
    top_thread,               ///< cpu -> thread entity (+ runtime)
    busiest_cpu,              ///< -> cpu entity (+ busy ns)
    most_distinct_cpu,        ///< -> cpu entity
    primary_cpu,              ///< tid -> cpu entity or "none"
    busy_time_exceeds,        ///< cpu, threshold_ns -> bool
    busiest_is_most_distinct, ///< -> bool
};

std::string_view to_string(QueryOp op) noexcept;
QueryOp parse_query_op(std::string_view text);

struct OracleQuery {
    QueryOp op = QueryOp::busiest_cpu;
    std::optional<Tid> tid;
    std::optional<CpuId> cpu;
    std::optional<Duration> threshold_ns;

    friend bool operator==(const OracleQuery&, const OracleQuery&) = default;
};

struct Quantity {
    std::uint64_t value = 0;
    std::string unit; ///< "ns" or "" for plain counts
    friend bool operator==(const Quantity&, const Quantity&) = default;
};

struct EntityAnswer {
    std::string id; ///< "cpu:N", "thread:N" or "none"
    std::optional<Quantity> quantity;
    friend bool operator==(const EntityAnswer&, const EntityAnswer&) = default;
};

using QueryResult = std::variant<Quantity, EntityAnswer, bool>;

/// Ground truth, straight from the analytics engine.
QueryResult evaluate(const OracleQuery& query, const Analytics& analytics, Window w);

/// Scheduling facts recoverable from one grounding representation (a graph or
/// a baseline dump). Used to check that a representation carries the answer.
struct WindowFacts {
    std::set<CpuId> cpus;
    std::map<CpuId, Duration> busy;
    std::map<CpuId, std::uint64_t> distinct;
    std::map<std::pair<CpuId, Tid>, Duration> runtime;
};

WindowFacts facts_from_graph(const KnowledgeGraph& graph);
WindowFacts facts_from_baseline(std::string_view baseline_text);
QueryResult evaluate(const OracleQuery& query, const WindowFacts& facts);

// ---------------------------------------------------------------------------
// References and items

struct NumericReference {
    double value = 0.0;
    std::string unit = "ns";
    double rel_tol = 0.01;
    double loose_tol = 0.10;
    friend bool operator==(const NumericReference&, const NumericReference&) = default;
};

struct ChoiceOption {
    std::string label; ///< "A".."F"
    std::string text;  ///< shown to the model
    std::string value; ///< entity id the option stands for, or "none"
    friend bool operator==(const ChoiceOption&, const ChoiceOption&) = default;
};

struct ChoiceReference {
    std::string letter;
    std::vector<ChoiceOption> options;
    friend bool operator==(const ChoiceReference&, const ChoiceReference&) = default;
};

struct BooleanReference {
    bool value = false;
    friend bool operator==(const BooleanReference&, const BooleanReference&) = default;
};

struct EntityReference {
    std::string canonical;
    std::vector<std::string> aliases;
    std::optional<NumericReference> quantity;
    friend bool operator==(const EntityReference&, const EntityReference&) = default;
};

struct ReferenceAnswer {
    std::variant<NumericReference, ChoiceReference, BooleanReference, EntityReference> answer;
    std::optional<OracleQuery> query;
    friend bool operator==(const ReferenceAnswer&, const ReferenceAnswer&) = default;
};

struct EntityFilter {
    std::optional<std::set<CpuId>> cpus;
    std::optional<std::set<Tid>> tids;
    friend bool operator==(const EntityFilter&, const EntityFilter&) = default;
};

struct BenchmarkItem {
    std::string id;
    std::string prompt;
    AnswerFormat answer_format = AnswerFormat::explanatory;
    HopScope hop_scope = HopScope::single;
    TemporalLocation temporal_loc = TemporalLocation::mid;
    Duration window_ns = 0;
    std::optional<EntityFilter> entities;
    ReferenceAnswer reference;
    friend bool operator==(const BenchmarkItem&, const BenchmarkItem&) = default;
};

/// Letter of the option standing for `entity_id`, falling back to a "none"
/// option when no option names it.
std::optional<std::string> choice_letter_for(const std::vector<ChoiceOption>& options, std::string_view entity_id);

/// Human-facing spellings accepted for an entity id, e.g. cpu:2 -> CPU_2, CPU 2.
std::vector<std::string> default_aliases(std::string_view entity_id);
std::string display_name(std::string_view entity_id);

/// Validates and loads a benchmark file (a JSON array of items). Schema
/// violations raise Error(item_schema) naming the offending field path.
std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path);
std::vector<BenchmarkItem> parse_benchmark(std::string_view json_text);
std::string serialize_benchmark(const std::vector<BenchmarkItem>& items);

QueryScope scope_for_window(const BenchmarkItem& item, Window window);
/// Window from the item's placement metadata; filters from its entity fields.
QueryScope scope_from_item(const BenchmarkItem& item, const TraceMeta& meta);

/// Flat dump of the scope's state intervals: two header lines, then one
/// tab-separated `path start_ns end_ns value` line per non-null interval,
/// clipped to the window. Covers Current_thread of every in-scope CPU and,
/// with a thread filter, Status of every listed thread.
std::string make_baseline_input(const Analytics& analytics, const QueryScope& scope);

/// Raw events of the window, one JSON line each.
std::string make_events_input(const std::vector<Event>& events, Window window);

/// Re-derives the reference answer for `window` from the item's oracle query.
/// Items without a query keep their stored reference.
ReferenceAnswer resolve_reference(const BenchmarkItem& item, const Analytics& analytics, Window window);

/// The item's reference with its answer replaced by `result`.
ReferenceAnswer reference_from_result(const BenchmarkItem& item, const QueryResult& result);

/// Twelve items, two per question pattern (explanatory, multiple choice,
/// true/false; single and multi hop), with references computed on `meta`'s trace.
std::vector<BenchmarkItem> make_seed_benchmark(const Analytics& analytics, const TraceMeta& meta);

/// The workload the shipped seed benchmark was authored against.
WorkloadSpec seed_workload();

} // namespace tracekg
