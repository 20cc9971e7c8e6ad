#include "tracekg/knowledge_graph.hpp"

#include "tracekg/error.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include "json.hpp"

namespace tracekg {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(NodeType type) noexcept
{
    return type == NodeType::thread ? "Thread" : "Cpu";
}

std::string_view to_string(EdgeLabel label) noexcept
{
    switch (label) {
    case EdgeLabel::executes_on: return "executes_on";
    case EdgeLabel::reads_from: return "reads_from";
    case EdgeLabel::holds_lock: return "holds_lock";
    }
    return "executes_on";
}

NodeType parse_node_type(std::string_view text)
{
    if (text == "Thread") {
        return NodeType::thread;
    }
    if (text == "Cpu") {
        return NodeType::cpu;
    }
    throw Error(Errc::format, fmt::format("unknown node type '{}'", text));
}

EdgeLabel parse_edge_label(std::string_view text)
{
    for (auto label : {EdgeLabel::executes_on, EdgeLabel::reads_from, EdgeLabel::holds_lock}) {
        if (to_string(label) == text) {
            return label;
        }
    }
    throw Error(Errc::format, fmt::format("unknown edge label '{}'", text));
}

std::string thread_node_id(Tid tid) { return fmt::format("thread:{}", tid); }
std::string cpu_node_id(CpuId cpu) { return fmt::format("cpu:{}", cpu); }

std::optional<std::uint64_t> KgNode::feature(std::string_view name) const
{
    for (const auto& [key, value] : features) {
        if (key == name) {
            return value;
        }
    }
    return std::nullopt;
}

const KgNode* KnowledgeGraph::node(std::string_view id) const
{
    for (const auto& n : nodes) {
        if (n.id == id) {
            return &n;
        }
    }
    return nullptr;
}

KnowledgeGraph build_graph(const Analytics& analytics, const QueryScope& scope)
{
    if (scope.cpus && scope.cpus->empty()) {
        throw Error(Errc::validation, "cpu filter must not be empty when present");
    }
    if (scope.tids && scope.tids->empty()) {
        throw Error(Errc::validation, "thread filter must not be empty when present");
    }
    const StatTable table = analytics.stats(scope.window);

    std::set<CpuId> cpus;
    if (scope.cpus) {
        cpus = *scope.cpus;
    } else {
        for (CpuId c = 0; c < analytics.cpu_count(); ++c) {
            cpus.insert(c);
        }
    }

    KnowledgeGraph graph;
    graph.window = scope.window;

    struct ThreadTotals {
        Duration runtime = 0;
        std::uint64_t cpus_used = 0;
    };
    std::map<Tid, ThreadTotals> threads;
    std::map<CpuId, std::uint64_t> distinct;
    for (const auto& [key, stat] : table.threads) {
        distinct[stat.cpu] += 1;
        if (!cpus.contains(stat.cpu) || (scope.tids && !scope.tids->contains(stat.tid))) {
            continue;
        }
        graph.edges.push_back(KgEdge{thread_node_id(stat.tid), EdgeLabel::executes_on, cpu_node_id(stat.cpu),
                                     stat.runtime, stat.switch_in_count, scope.window});
        auto& totals = threads[stat.tid];
        totals.runtime += stat.runtime;
        totals.cpus_used += 1;
    }

    for (CpuId cpu : cpus) {
        const auto busy = table.busy.contains(cpu) ? table.busy.at(cpu) : Duration{0};
        graph.nodes.push_back(KgNode{cpu_node_id(cpu),
                                     NodeType::cpu,
                                     {{std::string(kFeatureBusyTime), busy},
                                      {std::string(kFeatureDistinctThreads), distinct[cpu]}},
                                     scope.window});
    }
    for (const auto& [tid, totals] : threads) {
        graph.nodes.push_back(KgNode{thread_node_id(tid),
                                     NodeType::thread,
                                     {{std::string(kFeatureTotalRuntime), totals.runtime},
                                      {std::string(kFeatureCpusUsed), totals.cpus_used}},
                                     scope.window});
    }
    return graph;
}

// ---------------------------------------------------------------------------

namespace {

ordered_json window_json(const Window& w)
{
    return ordered_json{{"t1", w.t1}, {"t2", w.t2}};
}

template <typename Json>
void expect_keys(const Json& obj, std::initializer_list<std::string_view> keys, std::string_view what)
{
    if (!obj.is_object()) {
        throw Error(Errc::format, fmt::format("{} must be an object", what));
    }
    if (obj.size() != keys.size()) {
        throw Error(Errc::format, fmt::format("{} must have exactly {} keys", what, keys.size()));
    }
    for (auto key : keys) {
        if (!obj.contains(key)) {
            throw Error(Errc::format, fmt::format("{} is missing '{}'", what, key));
        }
    }
}

template <typename Json>
std::uint64_t as_u64(const Json& value, std::string_view what)
{
    if (!value.is_number_unsigned()) {
        throw Error(Errc::format, fmt::format("{} must be a non-negative integer", what));
    }
    return value.template get<std::uint64_t>();
}

template <typename Json>
const std::string& as_str(const Json& value, std::string_view what)
{
    if (!value.is_string()) {
        throw Error(Errc::format, fmt::format("{} must be a string", what));
    }
    return value.template get_ref<const std::string&>();
}

template <typename Json>
Window parse_window(const Json& obj, std::string_view what)
{
    expect_keys(obj, {"t1", "t2"}, what);
    return Window{as_u64(obj["t1"], "t1"), as_u64(obj["t2"], "t2")};
}

} // namespace

std::string serialize_graph(const KnowledgeGraph& graph)
{
    ordered_json doc;
    doc["nodes"] = ordered_json::array();
    for (const auto& node : graph.nodes) {
        ordered_json features = ordered_json::object();
        for (const auto& [key, value] : node.features) {
            features[key] = value;
        }
        doc["nodes"].push_back(ordered_json{{"id", node.id},
                                            {"type", to_string(node.type)},
                                            {"features", std::move(features)},
                                            {"window", window_json(node.scope)}});
    }
    doc["edges"] = ordered_json::array();
    for (const auto& edge : graph.edges) {
        doc["edges"].push_back(ordered_json{{"src", edge.src},
                                            {"label", to_string(edge.label)},
                                            {"dst", edge.dst},
                                            {"weight_ns", edge.weight_ns},
                                            {"switch_in_count", edge.switch_in_count},
                                            {"window", window_json(edge.scope)}});
    }
    doc["window"] = window_json(graph.window);
    return doc.dump();
}

KnowledgeGraph deserialize_graph(std::string_view json)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::format, fmt::format("graph JSON does not parse: {}", e.what()));
    }
    expect_keys(doc, {"nodes", "edges", "window"}, "graph");
    if (!doc["nodes"].is_array() || !doc["edges"].is_array()) {
        throw Error(Errc::format, "graph 'nodes' and 'edges' must be arrays");
    }
    KnowledgeGraph graph;
    graph.window = parse_window(doc["window"], "graph window");
    for (const auto& n : doc["nodes"]) {
        expect_keys(n, {"id", "type", "features", "window"}, "node");
        KgNode node;
        node.id = as_str(n["id"], "node id");
        node.type = parse_node_type(as_str(n["type"], "node type"));
        if (!n["features"].is_object()) {
            throw Error(Errc::format, "node features must be an object");
        }
        for (const auto& [key, value] : n["features"].items()) {
            node.features.emplace_back(key, as_u64(value, key));
        }
        node.scope = parse_window(n["window"], "node window");
        graph.nodes.push_back(std::move(node));
    }
    for (const auto& e : doc["edges"]) {
        expect_keys(e, {"src", "label", "dst", "weight_ns", "switch_in_count", "window"}, "edge");
        graph.edges.push_back(KgEdge{as_str(e["src"], "edge src"), parse_edge_label(as_str(e["label"], "edge label")),
                                     as_str(e["dst"], "edge dst"), as_u64(e["weight_ns"], "weight_ns"),
                                     as_u64(e["switch_in_count"], "switch_in_count"),
                                     parse_window(e["window"], "edge window")});
    }
    return graph;
}

bool is_canonical_graph_json(std::string_view json)
{
    try {
        return serialize_graph(deserialize_graph(json)) == json;
    } catch (const Error&) {
        return false;
    }
}

// ---------------------------------------------------------------------------

SchemaPrompt build_schema(const KnowledgeGraph& graph)
{
    bool has_cpu = false;
    bool has_thread = false;
    std::set<EdgeLabel> labels;
    for (const auto& node : graph.nodes) {
        (node.type == NodeType::cpu ? has_cpu : has_thread) = true;
    }
    for (const auto& edge : graph.edges) {
        labels.insert(edge.label);
    }

    std::string text;
    text += "Graph schema.\n";
    text += "Node types:\n";
    if (has_thread) {
        text += "- Thread (id \"thread:<tid>\"): a schedulable thread that ran inside the window.\n";
        text += fmt::format("  features: {} = nanoseconds the thread ran on the CPUs in this graph; "
                            "{} = number of CPUs in this graph it ran on.\n",
                            kFeatureTotalRuntime, kFeatureCpusUsed);
    }
    if (has_cpu) {
        text += "- Cpu (id \"cpu:<n>\"): a processor core.\n";
        text += fmt::format("  features: {} = nanoseconds the CPU ran any non-idle thread; "
                            "{} = number of different non-idle threads that ran on it.\n",
                            kFeatureBusyTime, kFeatureDistinctThreads);
    }
    if (!labels.empty()) {
        text += "Edge labels:\n";
    }
    if (labels.contains(EdgeLabel::executes_on)) {
        text += "- executes_on (Thread -> Cpu): the thread ran on the CPU inside the window. "
                "weight_ns = total nanoseconds it ran there; switch_in_count = number of separate runs.\n";
    }
    text += "Time: every window is {t1, t2} in integer nanoseconds since trace start, half-open [t1, t2). "
            "All durations are integer nanoseconds (1 s = 1000000000 ns). Thread 0 is the idle task and never "
            "appears as a node.\n";
    return SchemaPrompt{std::move(text)};
}

} // namespace tracekg
