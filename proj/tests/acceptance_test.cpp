// One test per acceptance criterion. Each prints a single PASS/FAIL line.

#include "fake_endpoint.hpp"
#include "support.hpp"

#include "tracekg/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

using namespace tracekg;

namespace {

constexpr Duration kSec = 1'000'000'000;

/// Prints the criterion's verdict when the test body finishes, and fails the
/// test when it overran its time budget.
class Criterion {
public:
    Criterion(int number, std::string title, double budget_s)
        : number_(number), title_(std::move(title)), budget_s_(budget_s), start_(std::chrono::steady_clock::now())
    {
    }
    ~Criterion()
    {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (elapsed > budget_s_) {
            ADD_FAILURE() << "criterion " << number_ << " took " << elapsed << " s, budget " << budget_s_ << " s";
        }
        const bool ok = !::testing::Test::HasFailure();
        std::printf("criterion %d: %s (%.2f s, budget %.0f s) %s%s\n", number_, ok ? "PASS" : "FAIL", elapsed,
                    budget_s_, title_.c_str(), note_.empty() ? "" : ("; " + note_).c_str());
        std::fflush(stdout);
    }
    Criterion(const Criterion&) = delete;
    Criterion& operator=(const Criterion&) = delete;

    void note(std::string text) { note_ = std::move(text); }

private:
    int number_;
    std::string title_;
    double budget_s_;
    std::chrono::steady_clock::time_point start_;
    std::string note_;
};

struct Built {
    StateSystem state;
    Analytics analytics;

    Built(const std::vector<Event>& events, Timestamp end, std::uint32_t cpus)
        : state(build_state_system(events, end)), analytics(state, cpus)
    {
    }
    Built(const Built&) = delete;
};

WorkloadSpec random_spec(std::mt19937_64& rng)
{
    WorkloadSpec spec;
    spec.seed = rng();
    spec.cpu_count = std::uniform_int_distribution<std::uint32_t>(2, 4)(rng);
    spec.thread_count = std::uniform_int_distribution<std::uint32_t>(2, 16)(rng);
    spec.mean_slice = std::uniform_int_distribution<Duration>(1'000, 5'000'000)(rng);
    // At most ~2000 decisions per CPU keeps every trace under 10^4 events.
    spec.duration = spec.mean_slice * std::uniform_int_distribution<Duration>(20, 2000)(rng);
    spec.skew = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return spec;
}

Window random_window(std::mt19937_64& rng, Timestamp end)
{
    const Timestamp a = std::uniform_int_distribution<Timestamp>(0, end - 1)(rng);
    const Timestamp b = std::uniform_int_distribution<Timestamp>(a + 1, end)(rng);
    return Window{a, b};
}

/// Argmax with ties to the smallest key, over an ordered map.
template <class Map>
std::optional<typename Map::key_type> argmax(const Map& values)
{
    std::optional<typename Map::key_type> best;
    typename Map::mapped_type best_value{};
    for (const auto& [key, value] : values) {
        if (!best || value > best_value) {
            best = key;
            best_value = value;
        }
    }
    return best;
}

/// Fully random graph, not produced by the builder.
KnowledgeGraph random_graph(std::mt19937_64& rng)
{
    auto num = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    KnowledgeGraph g;
    g.window = Window{num(0, 1'000'000), 0};
    g.window.t2 = g.window.t1 + num(1, 100 * kSec);
    const auto cpus = num(0, 8);
    const auto threads = num(0, 30);
    for (std::uint64_t c = 0; c < cpus; ++c) {
        g.nodes.push_back(KgNode{cpu_node_id(static_cast<CpuId>(c)),
                                 NodeType::cpu,
                                 {{std::string(kFeatureBusyTime), num(0, g.window.length())},
                                  {std::string(kFeatureDistinctThreads), num(0, threads)}},
                                 g.window});
    }
    for (std::uint64_t t = 0; t < threads; ++t) {
        g.nodes.push_back(KgNode{thread_node_id(static_cast<Tid>(num(1, 1'000'000))),
                                 NodeType::thread,
                                 {{std::string(kFeatureTotalRuntime), num(1, g.window.length())},
                                  {std::string(kFeatureCpusUsed), num(1, 8)}},
                                 g.window});
        if (cpus > 0) {
            for (int e = 0; e < static_cast<int>(num(0, 3)); ++e) {
                g.edges.push_back(KgEdge{g.nodes.back().id, EdgeLabel::executes_on,
                                         cpu_node_id(static_cast<CpuId>(num(0, cpus - 1))), num(1, g.window.length()),
                                         num(1, 50), g.window});
            }
        }
    }
    return g;
}

} // namespace

TEST(Acceptance, C1_ReferenceScoreArithmetic)
{
    Criterion c(1, "accuracy formula reproduces all reference score rows within 0.01", 1.0);
    const auto& rows = reference_rows();
    ASSERT_EQ(rows.size(), 108u);
    EXPECT_NEAR(accuracy_from_percentages(4.00, 0.67, 95.33), 95.67, 0.01 + 1e-9);
    EXPECT_NEAR(accuracy_from_percentages(30.00, 8.00, 62.00), 66.00, 0.01 + 1e-9);
    const auto mismatches = check_reference_rows(rows, 0.01 + 1e-9);
    for (const auto& m : mismatches) {
        ADD_FAILURE() << m.row.model << " " << m.row.interval << " " << m.row.format << " " << m.row.hop << " "
                      << m.row.input << ": " << m.row.pct0 << "/" << m.row.pct05 << "/" << m.row.pct1 << " -> "
                      << m.computed << ", printed " << m.row.expected_acc;
    }
    c.note(std::to_string(rows.size() - mismatches.size()) + " of " + std::to_string(rows.size()) +
           " triples within tolerance");
}

TEST(Acceptance, C2_ConsistencyExtremes)
{
    Criterion c(2, "consistency extremes", 1.0);
    for (double v : {0.0, 0.5, 1.0}) {
        for (std::size_t n : {1u, 3u, 10u}) {
            EXPECT_EQ(consistency(std::vector<double>(n, v)), 100.0);
        }
    }
    for (std::size_t k : {1u, 2u, 7u}) {
        std::vector<double> thirds;
        for (std::size_t i = 0; i < k; ++i) {
            thirds.insert(thirds.end(), {0.0, 0.5, 1.0});
        }
        EXPECT_EQ(consistency(thirds), 0.0);
    }
    // Two equally likely outcomes carry exactly one bit.
    const double expected = (1.0 - 1.0 / std::log2(3.0)) * 100.0;
    EXPECT_NEAR(consistency(std::vector<double>{0.0, 0.5}), expected, 1e-12);
    EXPECT_NEAR(consistency(std::vector<double>{0.5, 1.0, 0.5, 1.0}), 36.907, 0.001);
}

TEST(Acceptance, C3_OracleEquivalence)
{
    Criterion c(3, "analytics equal brute-force replay on 1000 synthetic traces", 60.0);
    std::mt19937_64 rng(20260101);
    std::size_t max_events = 0;
    for (int trace_index = 0; trace_index < 1000; ++trace_index) {
        const auto spec = random_spec(rng);
        const auto events = generate_synthetic_trace(spec);
        ASSERT_LE(events.size(), 10'000u);
        max_events = std::max(max_events, events.size());
        Built b(events, spec.duration, spec.cpu_count);
        std::vector<Window> windows{Window{0, spec.duration}};
        for (int i = 0; i < 3; ++i) {
            windows.push_back(random_window(rng, spec.duration));
        }
        for (const auto& w : windows) {
            const auto table = brute_force_replay(events, w, spec.cpu_count);
            ASSERT_EQ(b.analytics.stats(w), table) << "trace " << trace_index;

            std::map<CpuId, std::map<Tid, Duration>> by_cpu;
            std::map<Tid, std::map<CpuId, Duration>> by_tid;
            std::map<CpuId, Duration> busy;
            std::map<CpuId, std::size_t> distinct;
            for (CpuId cpu = 0; cpu < spec.cpu_count; ++cpu) {
                busy[cpu] = 0;
                distinct[cpu] = 0;
            }
            for (const auto& [key, stat] : table.threads) {
                if (stat.runtime == 0) {
                    continue;
                }
                by_cpu[key.first][key.second] = stat.runtime;
                by_tid[key.second][key.first] = stat.runtime;
                busy[key.first] += stat.runtime;
                ++distinct[key.first];
            }
            for (CpuId cpu = 0; cpu < spec.cpu_count; ++cpu) {
                for (Tid i = 0; i < static_cast<Tid>(spec.thread_count); ++i) {
                    const Tid tid = kFirstSyntheticTid + i;
                    const auto it = by_cpu[cpu].find(tid);
                    ASSERT_EQ(b.analytics.cpu_time_of_thread_on_cpu(tid, cpu, w),
                              it == by_cpu[cpu].end() ? 0 : it->second);
                }
                const auto top = b.analytics.top_thread_on_cpu(cpu, w);
                const auto expected_top = argmax(by_cpu[cpu]);
                ASSERT_EQ(top.has_value(), expected_top.has_value());
                if (top) {
                    ASSERT_EQ(top->tid, *expected_top);
                    ASSERT_EQ(top->runtime, by_cpu[cpu][*expected_top]);
                }
                ASSERT_EQ(b.analytics.distinct_threads_on_cpu(cpu, w), distinct[cpu]);
                ASSERT_EQ(b.analytics.busy_time_of_cpu(cpu, w), busy[cpu]);
            }
            const auto busiest = b.analytics.busiest_cpu(w);
            ASSERT_EQ(busiest.cpu, *argmax(busy));
            ASSERT_EQ(busiest.busy, busy[busiest.cpu]);
            ASSERT_EQ(busiest.all_idle, busy[busiest.cpu] == 0);
            ASSERT_EQ(b.analytics.cpu_serving_most_distinct_threads(w), *argmax(distinct));
            for (Tid i = 0; i < static_cast<Tid>(spec.thread_count); ++i) {
                const Tid tid = kFirstSyntheticTid + i;
                const auto it = by_tid.find(tid);
                const auto expected = it == by_tid.end() ? std::nullopt : argmax(it->second);
                ASSERT_EQ(b.analytics.primary_cpu_of_thread(tid, w), expected);
            }
        }
    }
    c.note("largest trace " + std::to_string(max_events) + " events");
}

TEST(Acceptance, C4_IntervalInvariants)
{
    Criterion c(4, "interval invariants over 10000 randomized windows", 30.0);
    std::mt19937_64 rng(4004);
    int windows = 0;
    for (int trace_index = 0; trace_index < 100; ++trace_index) {
        const auto spec = random_spec(rng);
        const auto events = generate_synthetic_trace(spec);
        Built b(events, spec.duration, spec.cpu_count);
        const auto& state = b.state;

        // Merge correctness: one stored interval per value change of each CPU quark.
        // Same-timestamp writes collapse to the last one; a write at the end adds nothing.
        std::map<CpuId, std::vector<Tid>> writes;
        std::map<CpuId, Timestamp> last_ts;
        for (const auto& e : events) {
            if (e.ts >= spec.duration) {
                continue;
            }
            auto& values = writes[e.cpu];
            const auto prev = last_ts.find(e.cpu);
            if (prev != last_ts.end() && prev->second == e.ts) {
                values.back() = as_sched_switch(e).next_tid;
            } else {
                values.push_back(as_sched_switch(e).next_tid);
            }
            last_ts[e.cpu] = e.ts;
        }
        for (const auto& [cpu, values] : writes) {
            std::size_t changes = values.empty() ? 0 : 1;
            for (std::size_t i = 1; i < values.size(); ++i) {
                changes += values[i] != values[i - 1] ? 1 : 0;
            }
            ASSERT_EQ(state.interval_count(*state.find_quark(cpu_current_thread_path(cpu))), changes);
        }
        for (Quark q = 0; q < state.quark_count(); ++q) {
            const auto all = state.intervals(q);
            ASSERT_FALSE(all.empty());
            ASSERT_EQ(all.back().end, spec.duration);
            for (std::size_t i = 0; i < all.size(); ++i) {
                ASSERT_LT(all[i].start, all[i].end);
                if (i > 0) {
                    ASSERT_EQ(all[i - 1].end, all[i].start);
                    ASSERT_NE(all[i - 1].value, all[i].value);
                }
            }
        }

        for (int k = 0; k < 100; ++k, ++windows) {
            const auto w = random_window(rng, spec.duration);
            for (Quark q = 0; q < state.quark_count(); ++q) {
                const auto range = state.query_range(q, w.t1, w.t2);
                for (std::size_t i = 0; i < range.size(); ++i) {
                    ASSERT_LE(w.t1, range[i].start);
                    ASSERT_LT(range[i].start, range[i].end);
                    ASSERT_LE(range[i].end, w.t2);
                    ASSERT_EQ(state.query_point(q, range[i].start), range[i].value);
                    if (range[i].end < spec.duration) {
                        // End-exclusive: the value at `end` belongs to the next interval.
                        ASSERT_TRUE(i + 1 < range.size() || range[i].end == w.t2);
                    }
                    if (i > 0) {
                        ASSERT_EQ(range[i - 1].end, range[i].start);
                        ASSERT_NE(range[i - 1].value, range[i].value);
                    }
                }
            }
            for (CpuId cpu = 0; cpu < spec.cpu_count; ++cpu) {
                Duration threads_total = 0;
                for (Tid i = 0; i < static_cast<Tid>(spec.thread_count); ++i) {
                    const Duration rt = b.analytics.cpu_time_of_thread_on_cpu(kFirstSyntheticTid + i, cpu, w);
                    ASSERT_LE(rt, w.length());
                    threads_total += rt;
                }
                // Idle = Null intervals plus any stretch before the quark's first write.
                Duration covered = 0;
                Duration idle = 0;
                if (const auto q = state.find_quark(cpu_current_thread_path(cpu))) {
                    for (const auto& iv : state.query_range(*q, w.t1, w.t2)) {
                        covered += iv.end - iv.start;
                        idle += iv.value.is_null() ? iv.end - iv.start : 0;
                    }
                }
                idle += w.length() - covered;
                ASSERT_EQ(threads_total + idle, w.length()) << "trace " << trace_index << " cpu " << cpu;
            }
        }
    }
    EXPECT_EQ(windows, 10'000);
}

TEST(Acceptance, C5_LogarithmicPointQuery)
{
    Criterion c(5, "point query over 10^6 intervals uses at most 21 comparisons", 10.0);
    constexpr std::size_t kIntervals = 1'000'000;
    const auto bound = static_cast<std::uint64_t>(std::ceil(std::log2(static_cast<double>(kIntervals)))) + 1;
    ASSERT_EQ(bound, 21u);
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/Bench/value"));
    for (std::size_t i = 0; i < kIntervals; ++i) {
        s.modify_attribute(q, StateValue::integer(static_cast<std::int64_t>(i % 2)), 10 * i);
    }
    s.seal(10 * kIntervals);
    ASSERT_EQ(s.interval_count(q), kIntervals);

    std::mt19937_64 rng(5);
    std::uint64_t worst = 0;
    std::vector<Timestamp> probes{0, 9, 10, 10 * kIntervals - 1, 10 * (kIntervals / 2)};
    for (int i = 0; i < 100'000; ++i) {
        probes.push_back(std::uniform_int_distribution<Timestamp>(0, 10 * kIntervals - 1)(rng));
    }
    for (Timestamp t : probes) {
        QueryProbe probe;
        const auto v = s.query_point(q, t, &probe);
        ASSERT_EQ(v, StateValue::integer(static_cast<std::int64_t>((t / 10) % 2))) << "t " << t;
        worst = std::max(worst, probe.comparisons);
    }
    EXPECT_LE(worst, bound);
    c.note("worst case " + std::to_string(worst) + " comparisons over " + std::to_string(probes.size()) + " probes");
}

TEST(Acceptance, C6_GraphConservationAndAgreement)
{
    Criterion c(6, "graph edge weights conserve busy time and agree with top thread over 500 scopes", 30.0);
    std::mt19937_64 rng(6006);
    int scopes = 0;
    for (int trace_index = 0; trace_index < 50; ++trace_index) {
        const auto spec = random_spec(rng);
        const auto events = generate_synthetic_trace(spec);
        Built b(events, spec.duration, spec.cpu_count);
        for (int k = 0; k < 10; ++k, ++scopes) {
        QueryScope scope{random_window(rng, spec.duration), std::nullopt, std::nullopt};
        if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
            std::set<CpuId> cpus;
            for (CpuId cpu = 0; cpu < spec.cpu_count; ++cpu) {
                if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
                    cpus.insert(cpu);
                }
            }
            if (!cpus.empty()) {
                scope.cpus = cpus;
            }
        }
        const auto g = build_graph(b.analytics, scope);
        std::map<std::string, Duration> into;
        std::map<std::string, std::pair<Duration, Tid>> best;
        for (const auto& e : g.edges) {
            ASSERT_GT(e.weight_ns, 0u);
            ASSERT_LE(e.weight_ns, scope.window.length());
            into[e.dst] += e.weight_ns;
            const Tid tid = std::stoll(e.src.substr(std::string("thread:").size()));
            auto& slot = best[e.dst];
            if (e.weight_ns > slot.first || (e.weight_ns == slot.first && tid < slot.second)) {
                slot = {e.weight_ns, tid};
            }
        }
        for (const auto& node : g.nodes) {
            if (node.type != NodeType::cpu) {
                ASSERT_GE(*node.feature(kFeatureTotalRuntime), 1u);
                continue;
            }
            const auto cpu = static_cast<CpuId>(std::stoul(node.id.substr(4)));
            ASSERT_EQ(into[node.id], *node.feature(kFeatureBusyTime)) << node.id;
            const auto top = b.analytics.top_thread_on_cpu(cpu, scope.window);
            ASSERT_EQ(top.has_value(), best.contains(node.id));
            if (top) {
                ASSERT_EQ(best[node.id].second, top->tid) << node.id;
                ASSERT_EQ(best[node.id].first, top->runtime);
            }
        }
        }
    }
    EXPECT_EQ(scopes, 500);
}

TEST(Acceptance, C7_SerializationFixpoint)
{
    Criterion c(7, "graph serialization fixpoint on 100 random graphs; envelopes byte-stable", 5.0);
    std::mt19937_64 rng(7007);
    const auto events = generate_synthetic_trace(seed_workload());
    const auto meta = compute_meta(events);
    Built b(events, meta.end, seed_workload().cpu_count);
    for (int i = 0; i < 100; ++i) {
        const auto g = i % 2 == 0 ? random_graph(rng)
                                  : build_graph(b.analytics, QueryScope{random_window(rng, meta.end), std::nullopt, std::nullopt});
        const auto once = serialize_graph(g);
        const auto back = deserialize_graph(once);
        ASSERT_EQ(back, g);
        ASSERT_EQ(serialize_graph(back), once);
        ASSERT_TRUE(is_canonical_graph_json(once));

        const auto schema = build_schema(g);
        const std::string question = "Which CPU was busiest in window " + std::to_string(i) + "?";
        const auto env = assemble_prompt(schema, once, question, i % 3 != 0).serialize();
        ASSERT_EQ(assemble_prompt(build_schema(back), serialize_graph(back), question, i % 3 != 0).serialize(), env);
        const auto reparsed = nlohmann::ordered_json::parse(env);
        ASSERT_EQ(reparsed.dump(), env);
        ASSERT_EQ(reparsed["graph"].dump(), once);
    }
}

TEST(Acceptance, C8_ClosedLoopPipeline)
{
    Criterion c(8, "oracle mock scores 100/100 on the seed benchmark; wrong mock scores 0 on MC and T/F", 30.0);
    test::TempDir dir;
    const auto spec = seed_workload();
    {
        const auto generated = generate_synthetic_trace(spec);
        VectorEventStream stream(generated);
        std::ofstream out(dir / "seed.jsonl", std::ios::binary);
        write_trace(out, stream);
    }
    auto loaded = load_trace(dir / "seed.jsonl");
    const auto state = build_state_system(*loaded.events, loaded.meta.end);
    const Analytics analytics(state, spec.cpu_count);
    const auto items = load_benchmark(std::filesystem::path(TRACEKG_SOURCE_DIR) / "data" / "seed_benchmark.json");
    ASSERT_EQ(items, make_seed_benchmark(analytics, loaded.meta));
    const TraceContext ctx{&analytics, loaded.meta, "seed"};
    const auto grid = default_grid({"oracle-mock"});

    auto oracle = Bridge::live(std::make_shared<OracleMockModel>(items), 8);
    GridOptions options;
    options.parallel_cells = 4;
    const auto good = run_grid(items, grid, ctx, *oracle, LlmConfig{}, options);
    ASSERT_EQ(good.cells.size(), 18u);
    for (const auto& cell : good.cells) {
        ASSERT_TRUE(cell.complete) << cell.error;
    }
    for (const auto& row : good.rows) {
        EXPECT_EQ(row.accuracy, 100.0) << row.window_ns << " " << to_string(row.loc) << " " << to_string(row.grounding)
                                       << " " << to_string(row.format) << " " << to_string(row.hop);
        EXPECT_EQ(row.consistency, 100.0);
        EXPECT_EQ(row.n0 + row.n05 + row.n1, row.n);
    }

    auto wrong = Bridge::live(std::make_shared<WrongMockModel>(items), 8);
    const auto bad = run_grid(items, grid, ctx, *wrong, LlmConfig{}, options);
    for (const auto& row : bad.rows) {
        if (row.format != AnswerFormat::explanatory) {
            EXPECT_EQ(row.accuracy, 0.0) << to_string(row.format);
        }
    }
    c.note(std::to_string(good.rows.size()) + " report rows, " + std::to_string(oracle->model_calls()) + " model calls");
}

TEST(Acceptance, C9_ReplayDeterminism)
{
    Criterion c(9, "cassette replay twice gives identical reports with zero network requests", 10.0);
    const auto events = generate_synthetic_trace(seed_workload());
    const auto meta = compute_meta(events);
    Built b(events, meta.end, seed_workload().cpu_count);
    const auto items = make_seed_benchmark(b.analytics, meta);
    const TraceContext ctx{&b.analytics, meta, "seed"};

    GridSpec grid;
    grid.models = {"net-model"};
    grid.windows = {kSec, 10 * kSec};
    grid.locations = {TemporalLocation::mid};
    grid.groundings = {Grounding::baseline, Grounding::taaf};
    grid.temperatures = {0.5};
    grid.samples = 3;

    OracleMockModel oracle(items);
    test::FakeEndpoint server({}, [&](const std::string& user, std::size_t) {
        return oracle.complete(user, LlmConfig{}, 0).text;
    });
    LlmConfig cfg;
    cfg.endpoint = server.url();
    cfg.api_key_env = "TRACEKG_ACCEPTANCE_KEY";
    cfg.retry_backoff = std::chrono::milliseconds(0);
    ::setenv("TRACEKG_ACCEPTANCE_KEY", "sk-local", 1);

    test::TempDir dir;
    const auto cassette = dir / "cassette.json";
    auto recorder =
        Bridge::record(std::make_shared<ChatCompletionClient>(std::make_shared<HttplibTransport>()), cassette);
    const auto recorded = run_grid(items, grid, ctx, *recorder, cfg);
    const auto recorded_requests = server.calls();
    ASSERT_EQ(recorded_requests, 4u * 12u * 3u);

    auto first = Bridge::replay(cassette);
    const auto a = run_grid(items, grid, ctx, *first, cfg);
    auto second = Bridge::replay(cassette);
    const auto b2 = run_grid(items, grid, ctx, *second, cfg);
    EXPECT_EQ(server.calls(), recorded_requests);
    EXPECT_EQ(first->model_calls(), 0u);
    EXPECT_EQ(second->model_calls(), 0u);
    EXPECT_EQ(report_csv(a), report_csv(b2));
    EXPECT_EQ(report_json(a), report_json(b2));
    EXPECT_EQ(report_csv(a), report_csv(recorded));
    for (const auto& row : a.rows) {
        EXPECT_EQ(row.accuracy, 100.0);
    }
    c.note(std::to_string(recorded_requests) + " requests while recording, 0 while replaying");
}

TEST(Acceptance, C10_ProtocolShapeOnly)
{
    Criterion c(10, "evaluation protocol shape (no accuracy values asserted against live models)", 5.0);
    const auto grid = default_grid({"gpt-4.1-nano", "gpt-4o", "o4-mini"});
    EXPECT_EQ(grid.models.size(), 3u);
    EXPECT_EQ(grid.windows, (std::vector<Duration>{kSec, 10 * kSec, 100 * kSec}));
    EXPECT_EQ(grid.locations,
              (std::vector<TemporalLocation>{TemporalLocation::start, TemporalLocation::mid, TemporalLocation::end}));
    EXPECT_EQ(grid.groundings, (std::vector<Grounding>{Grounding::baseline, Grounding::taaf}));
    EXPECT_EQ(grid.samples, 3);
    EXPECT_EQ(temperature_sweep(), (std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}));

    TraceMeta meta;
    meta.end = 60 * kSec;
    EXPECT_EQ(window_for_location(meta, TemporalLocation::start, 10 * kSec), (Window{5 * kSec, 15 * kSec}));
    EXPECT_EQ(window_for_location(meta, TemporalLocation::mid, 10 * kSec), (Window{30 * kSec, 40 * kSec}));
    EXPECT_EQ(window_for_location(meta, TemporalLocation::end, 10 * kSec), (Window{45 * kSec, 55 * kSec}));

    const std::string graph = R"({"nodes":[],"edges":[],"window":{"t1":0,"t2":1}})";
    const auto with = nlohmann::ordered_json::parse(assemble_prompt(SchemaPrompt{"S"}, graph, "q", true).serialize());
    const auto without = nlohmann::ordered_json::parse(assemble_prompt(SchemaPrompt{"S"}, graph, "q", false).serialize());
    EXPECT_EQ(with["schema"], "S");
    EXPECT_EQ(without["schema"], "");
    EXPECT_EQ(with["graph"], without["graph"]);

    // Three samples per question through the bridge.
    auto bridge = Bridge::live(std::make_shared<FixedAnswerModel>("True"));
    EXPECT_EQ(bridge->ask(assemble_baseline_prompt("x", "q"), LlmConfig{}).size(), 3u);
}
