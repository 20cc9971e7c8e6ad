#pragma once

#include "tracekg/analytics.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracekg {

enum class NodeType { thread, cpu };

/// `reads_from` and `holds_lock` are reserved labels; the builder only emits
/// `executes_on`.
enum class EdgeLabel { executes_on, reads_from, holds_lock };

std::string_view to_string(NodeType type) noexcept;
std::string_view to_string(EdgeLabel label) noexcept;
NodeType parse_node_type(std::string_view text);
EdgeLabel parse_edge_label(std::string_view text);

inline constexpr std::string_view kFeatureTotalRuntime = "total_runtime_ns";
inline constexpr std::string_view kFeatureCpusUsed = "cpus_used";
inline constexpr std::string_view kFeatureBusyTime = "busy_time_ns";
inline constexpr std::string_view kFeatureDistinctThreads = "distinct_threads";

std::string thread_node_id(Tid tid);
std::string cpu_node_id(CpuId cpu);

struct KgNode {
    std::string id;
    NodeType type = NodeType::cpu;
    /// Feature name -> non-negative integer, in serialization order.
    std::vector<std::pair<std::string, std::uint64_t>> features;
    Window scope;

    std::optional<std::uint64_t> feature(std::string_view name) const;

    friend bool operator==(const KgNode&, const KgNode&) = default;
};

struct KgEdge {
    std::string src;
    EdgeLabel label = EdgeLabel::executes_on;
    std::string dst;
    Duration weight_ns = 0;
    std::uint64_t switch_in_count = 0;
    Window scope;

    friend bool operator==(const KgEdge&, const KgEdge&) = default;
};

/// Query-scoped graph: typed nodes, labelled weighted edges, every element
/// scoped to the query window.
struct KnowledgeGraph {
    Window window;
    std::vector<KgNode> nodes;
    std::vector<KgEdge> edges;

    const KgNode* node(std::string_view id) const;

    friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

struct QueryScope {
    Window window;
    std::optional<std::set<CpuId>> cpus;
    std::optional<std::set<Tid>> tids;

    friend bool operator==(const QueryScope&, const QueryScope&) = default;
};

/// One Cpu node per in-scope CPU, one Thread node per non-idle thread with
/// positive runtime on an in-scope CPU (after the thread filter), one
/// `executes_on` edge per (thread, cpu) pair with positive runtime.
///
/// Cpu features describe the CPU as a whole (busy time, distinct threads) and
/// are not narrowed by the thread filter. Thread features sum over the
/// in-scope CPUs. Cpu nodes come first, then Thread nodes, each ascending;
/// edges are ordered by (cpu, tid).
KnowledgeGraph build_graph(const Analytics& analytics, const QueryScope& scope);

/// Canonical compact JSON: {"nodes":[...],"edges":[...],"window":{"t1":..,"t2":..}}.
std::string serialize_graph(const KnowledgeGraph& graph);

/// Throws Error(format) on malformed input.
KnowledgeGraph deserialize_graph(std::string_view json);

/// True when `json` is byte-identical to its own canonical re-serialization.
bool is_canonical_graph_json(std::string_view json);

/// Schema prompt describing only the node types and edge labels present.
struct SchemaPrompt {
    std::string text;
    friend bool operator==(const SchemaPrompt&, const SchemaPrompt&) = default;
};

SchemaPrompt build_schema(const KnowledgeGraph& graph);

} // namespace tracekg
