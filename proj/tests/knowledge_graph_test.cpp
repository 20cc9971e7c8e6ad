#include "support.hpp"

#include "tracekg/benchmark.hpp"
#include "tracekg/knowledge_graph.hpp"
#include "tracekg/llm_bridge.hpp"

#include "json.hpp"

using namespace tracekg;

namespace {

constexpr Duration kSec = 1'000'000'000;

struct Built {
    StateSystem state;
    Analytics analytics;

    Built(const std::vector<Event>& events, Timestamp end, std::uint32_t cpus = 0)
        : state(build_state_system(events, end)), analytics(state, cpus)
    {
    }
    Built(const Built&) = delete;
};

/// Thread 5130 runs 5.25 s on CPU 2 inside a 6 s trace.
std::vector<Event> fig_trace()
{
    return {make_sched_switch(0, 2, 0, 5130), make_sched_switch(5'250'000'000, 2, 5130, 0)};
}

} // namespace

TEST(BuildGraph, SingleThreadSingleCpu)
{
    Built b(fig_trace(), 6 * kSec);
    const QueryScope scope{{0, 6 * kSec}, std::set<CpuId>{2}, std::nullopt};
    const auto g = build_graph(b.analytics, scope);
    ASSERT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.nodes[0].id, "cpu:2");
    EXPECT_EQ(g.nodes[1].id, "thread:5130");
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].src, "thread:5130");
    EXPECT_EQ(g.edges[0].dst, "cpu:2");
    EXPECT_EQ(g.edges[0].label, EdgeLabel::executes_on);
    EXPECT_EQ(g.edges[0].weight_ns, 5'250'000'000u);
    EXPECT_EQ(g.nodes[0].feature(kFeatureBusyTime), 5'250'000'000u);
    EXPECT_EQ(g.nodes[1].feature(kFeatureTotalRuntime), 5'250'000'000u);
    EXPECT_EQ(g.nodes[1].feature(kFeatureCpusUsed), 1u);
}

TEST(BuildGraph, IdleWindowHasOnlyCpuNodes)
{
    Built b(fig_trace(), 6 * kSec);
    const auto g = build_graph(b.analytics, QueryScope{{5'500'000'000, 6 * kSec}, std::nullopt, std::nullopt});
    EXPECT_EQ(g.nodes.size(), 3u);
    for (const auto& n : g.nodes) {
        EXPECT_EQ(n.type, NodeType::cpu);
    }
    EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, EmptyFiltersAreRejected)
{
    Built b(fig_trace(), 6 * kSec);
    EXPECT_ERRC(build_graph(b.analytics, QueryScope{{0, kSec}, std::set<CpuId>{}, std::nullopt}), Errc::validation);
    EXPECT_ERRC(build_graph(b.analytics, QueryScope{{0, kSec}, std::nullopt, std::set<Tid>{}}), Errc::validation);
}

TEST(BuildGraph, ThreadFilterSelectsWithoutRecomputing)
{
    std::mt19937_64 rng(17);
    for (int round = 0; round < 50; ++round) {
        const auto trace = test::random_trace(rng, 3, 8, 400);
        Built b(trace.events, trace.end, trace.cpus);
        const Window w{0, trace.end};
        const auto full = build_graph(b.analytics, QueryScope{w, std::nullopt, std::nullopt});
        const std::set<Tid> keep{trace.tids[0], trace.tids[3]};
        const auto filtered = build_graph(b.analytics, QueryScope{w, std::nullopt, keep});
        for (const auto& edge : filtered.edges) {
            const auto it = std::find_if(full.edges.begin(), full.edges.end(), [&](const KgEdge& e) {
                return e.src == edge.src && e.dst == edge.dst;
            });
            ASSERT_NE(it, full.edges.end());
            EXPECT_EQ(*it, edge);
        }
        for (const auto& node : filtered.nodes) {
            if (node.type == NodeType::cpu) {
                EXPECT_EQ(*full.node(node.id), node);
            }
        }
    }
}

TEST(BuildGraph, Deterministic)
{
    const auto events = generate_synthetic_trace(WorkloadSpec{3, 4, 8, 2 * kSec, 5'000'000, 0.3});
    Built a(events, 2 * kSec);
    Built b(events, 2 * kSec);
    const QueryScope scope{{kSec / 3, kSec}, std::set<CpuId>{1, 3}, std::nullopt};
    EXPECT_EQ(serialize_graph(build_graph(a.analytics, scope)), serialize_graph(build_graph(b.analytics, scope)));
}

TEST(SerializeGraph, TwoNodesOneEdge)
{
    Built b(fig_trace(), 6 * kSec);
    const auto g = build_graph(b.analytics, QueryScope{{0, 6 * kSec}, std::set<CpuId>{2}, std::nullopt});
    const auto doc = nlohmann::json::parse(serialize_graph(g));
    EXPECT_EQ(doc["nodes"].size(), 2u);
    EXPECT_EQ(doc["edges"].size(), 1u);
    EXPECT_EQ(doc["edges"][0]["weight_ns"], 5'250'000'000u);
    EXPECT_EQ(deserialize_graph(serialize_graph(g)), g);
}

TEST(SerializeGraph, EmptyGraph)
{
    KnowledgeGraph g;
    g.window = Window{10, 20};
    EXPECT_EQ(serialize_graph(g), R"({"nodes":[],"edges":[],"window":{"t1":10,"t2":20}})");
    EXPECT_TRUE(is_canonical_graph_json(serialize_graph(g)));
    EXPECT_FALSE(is_canonical_graph_json(R"({"edges":[],"nodes":[],"window":{"t1":10,"t2":20}})"));
    EXPECT_FALSE(is_canonical_graph_json(R"({ "nodes":[],"edges":[],"window":{"t1":10,"t2":20}})"));
    EXPECT_ERRC(deserialize_graph("{"), Errc::format);
    EXPECT_ERRC(deserialize_graph(R"({"nodes":[],"edges":[]})"), Errc::format);
}

TEST(Schema, ListsPresentTypesOnly)
{
    Built b(fig_trace(), 6 * kSec);
    const auto full = build_schema(build_graph(b.analytics, QueryScope{{0, 6 * kSec}, std::nullopt, std::nullopt}));
    EXPECT_NE(full.text.find("- Thread"), std::string::npos);
    EXPECT_NE(full.text.find("- Cpu"), std::string::npos);
    EXPECT_NE(full.text.find("executes_on"), std::string::npos);

    const auto idle = build_schema(build_graph(b.analytics, QueryScope{{5'500'000'000, 6 * kSec}, std::nullopt, std::nullopt}));
    EXPECT_EQ(idle.text.find("- Thread"), std::string::npos);
    EXPECT_NE(idle.text.find("- Cpu"), std::string::npos);

    const auto other = build_schema(build_graph(b.analytics, QueryScope{{kSec, 2 * kSec}, std::set<CpuId>{2}, std::nullopt}));
    EXPECT_EQ(other, full);
}

TEST(ScopeFromItem, MidWindowWithEntities)
{
    TraceMeta meta;
    meta.end = 60 * kSec;
    BenchmarkItem item;
    item.temporal_loc = TemporalLocation::mid;
    item.window_ns = kSec;
    item.entities = EntityFilter{std::set<CpuId>{0}, std::set<Tid>{5130}};
    const auto scope = scope_from_item(item, meta);
    EXPECT_EQ(scope.window, (Window{30 * kSec, 31 * kSec}));
    EXPECT_EQ(scope.cpus, std::set<CpuId>{0});
    EXPECT_EQ(scope.tids, std::set<Tid>{5130});
}

TEST(ScopeFromItem, NoEntitiesAndStartPlacement)
{
    TraceMeta meta;
    meta.end = 60 * kSec;
    BenchmarkItem item;
    item.temporal_loc = TemporalLocation::start;
    item.window_ns = 10 * kSec;
    const auto scope = scope_from_item(item, meta);
    EXPECT_EQ(scope.window, (Window{5 * kSec, 15 * kSec}));
    EXPECT_FALSE(scope.cpus.has_value());
    EXPECT_FALSE(scope.tids.has_value());
    item.window_ns = 0;
    EXPECT_ERRC(scope_from_item(item, meta), Errc::item_schema);
}

TEST(AssemblePrompt, KeysInOrder)
{
    const std::string graph = R"({"nodes":[],"edges":[],"window":{"t1":0,"t2":5}})";
    const auto env = assemble_prompt(SchemaPrompt{"S"}, graph, "q?", true);
    EXPECT_EQ(env.serialize(), R"({"schema":"S","graph":{"nodes":[],"edges":[],"window":{"t1":0,"t2":5}},"user query":"q?"})");
    const auto off = assemble_prompt(SchemaPrompt{"S"}, graph, "q?", false);
    EXPECT_EQ(off.serialize(), R"({"schema":"","graph":{"nodes":[],"edges":[],"window":{"t1":0,"t2":5}},"user query":"q?"})");
    EXPECT_EQ(assemble_prompt(SchemaPrompt{"S"}, graph, "q?", true).serialize(), env.serialize());
}

TEST(AssemblePrompt, Errors)
{
    const std::string graph = R"({"nodes":[],"edges":[],"window":{"t1":0,"t2":5}})";
    EXPECT_ERRC(assemble_prompt(SchemaPrompt{"S"}, graph, "", true), Errc::validation);
    EXPECT_ERRC(assemble_prompt(SchemaPrompt{"S"}, R"({"nodes": [],"edges":[],"window":{"t1":0,"t2":5}})", "q", true),
                Errc::format);
}

TEST(AssemblePrompt, OtherGroundings)
{
    EXPECT_EQ(assemble_baseline_prompt("rows", "q").serialize(), R"({"state values":"rows","user query":"q"})");
    EXPECT_EQ(assemble_events_prompt("ev", "q").serialize(), R"({"events":"ev","user query":"q"})");
}

TEST(AssemblePrompt, LengthMonotoneInGraphSize)
{
    const auto events = generate_synthetic_trace(WorkloadSpec{9, 4, 12, 2 * kSec, 5'000'000, 0.0});
    Built b(events, 2 * kSec);
    std::size_t last = 0;
    for (CpuId n = 1; n <= 4; ++n) {
        std::set<CpuId> cpus;
        for (CpuId c = 0; c < n; ++c) {
            cpus.insert(c);
        }
        const auto g = build_graph(b.analytics, QueryScope{{0, 2 * kSec}, cpus, std::nullopt});
        const auto size = assemble_prompt(build_schema(g), serialize_graph(g), "q", true).serialize().size();
        EXPECT_GT(size, last);
        last = size;
    }
}
