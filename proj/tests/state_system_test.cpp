#include "support.hpp"

#include "tracekg/state_system.hpp"

using namespace tracekg;

namespace {

const StateValue kNull = StateValue::null();

StateValue I(std::int64_t v) { return StateValue::integer(v); }

/// Quark holding [0,100)=1, [100,300)=2, sealed at 300.
StateSystem two_interval_system(Quark& q)
{
    StateSystem s;
    q = s.get_or_create_quark(AttributePath::parse("/Test/value"));
    s.modify_attribute(q, I(1), 0);
    s.modify_attribute(q, I(2), 100);
    s.seal(300);
    return s;
}

} // namespace

TEST(AttributePath, ParseAndPrint)
{
    EXPECT_EQ(AttributePath::parse("/CPUs/0/Current_thread").str(), "/CPUs/0/Current_thread");
    EXPECT_EQ(cpu_current_thread_path(3).str(), "/CPUs/3/Current_thread");
    EXPECT_EQ(thread_status_path(42).str(), "/Threads/42/Status");
    EXPECT_ERRC(AttributePath::parse("CPUs/0"), Errc::parse);
    EXPECT_ERRC(AttributePath::parse("/CPUs//0"), Errc::parse);
}

TEST(Quarks, IdempotentAndSequential)
{
    StateSystem s;
    EXPECT_EQ(s.get_or_create_quark(AttributePath::parse("/CPUs/0/Current_thread")), 0u);
    EXPECT_EQ(s.get_or_create_quark(AttributePath::parse("/CPUs/0/Current_thread")), 0u);
    EXPECT_EQ(s.get_or_create_quark(AttributePath::parse("/Threads/1/Status")), 1u);
    EXPECT_EQ(s.path_of(1).str(), "/Threads/1/Status");
    EXPECT_EQ(s.find_quark(AttributePath::parse("/Threads/1/Status")), Quark{1});
    EXPECT_FALSE(s.find_quark(AttributePath::parse("/Nope")).has_value());
}

TEST(Quarks, CreateAfterSealFails)
{
    StateSystem s;
    s.seal(10);
    EXPECT_ERRC(s.get_or_create_quark(AttributePath::parse("/a")), Errc::sealed);
}

TEST(Modify, ClosesPreviousValue)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.modify_attribute(q, I(5), 100);
    s.modify_attribute(q, I(7), 200);
    EXPECT_EQ(s.intervals(q), (std::vector<StateInterval>{{100, 200, q, I(5)}}));
    s.seal(300);
    EXPECT_EQ(s.intervals(q), (std::vector<StateInterval>{{100, 200, q, I(5)}, {200, 300, q, I(7)}}));
}

TEST(Modify, EqualValuesMerge)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.modify_attribute(q, I(5), 100);
    s.modify_attribute(q, I(5), 200);
    EXPECT_TRUE(s.intervals(q).empty());
    s.seal(300);
    EXPECT_EQ(s.intervals(q), (std::vector<StateInterval>{{100, 300, q, I(5)}}));
}

TEST(Modify, TimeRegressionIsOrdering)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.modify_attribute(q, I(5), 100);
    EXPECT_ERRC(s.modify_attribute(q, I(6), 50), Errc::ordering);
}

TEST(Modify, AfterSealFails)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.seal(10);
    EXPECT_ERRC(s.modify_attribute(q, I(1), 20), Errc::sealed);
}

TEST(ApplyEvent, SwitchToThread)
{
    StateSystem s;
    s.apply_event(make_sched_switch(100, 0, 0, 42));
    s.seal(200);
    const auto cpu = *s.find_quark(cpu_current_thread_path(0));
    const auto status = *s.find_quark(thread_status_path(42));
    EXPECT_EQ(s.query_point(cpu, 100), I(42));
    EXPECT_EQ(s.query_point(status, 150), StateValue::string("RUNNING"));
    EXPECT_FALSE(s.find_quark(thread_status_path(0)).has_value());
}

TEST(ApplyEvent, SwitchToIdle)
{
    StateSystem s;
    s.apply_event(make_sched_switch(100, 0, 0, 42));
    s.apply_event(make_sched_switch(150, 0, 42, 0));
    s.seal(200);
    const auto cpu = *s.find_quark(cpu_current_thread_path(0));
    const auto status = *s.find_quark(thread_status_path(42));
    EXPECT_EQ(s.query_point(cpu, 160), kNull);
    EXPECT_EQ(s.query_point(status, 160), StateValue::string("WAITING"));
}

TEST(ApplyEvent, OpaqueKindIsSkipped)
{
    StateSystem s;
    s.apply_event(Event{5, "custom_probe", 0, {{"x", PayloadValue{std::string("y")}}}});
    EXPECT_EQ(s.skipped_events(), 1u);
    EXPECT_EQ(s.applied_events(), 0u);
    EXPECT_EQ(s.quark_count(), 0u);
}

TEST(ApplyEvent, CustomHandler)
{
    StateSystem s;
    s.register_handler("custom_probe", [](StateSystem& st, const Event& e) {
        st.modify_attribute(st.get_or_create_quark(AttributePath::parse("/Probe")), StateValue::string("hit"), e.ts);
    });
    s.apply_event(Event{5, "custom_probe", 0, {}});
    s.seal(10);
    EXPECT_EQ(s.skipped_events(), 0u);
    EXPECT_EQ(s.query_point(*s.find_quark(AttributePath::parse("/Probe")), 7), StateValue::string("hit"));
}

TEST(Seal, ClosesOpenInterval)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.modify_attribute(q, I(42), 100);
    EXPECT_EQ(s.seal(500), SealResult::sealed);
    EXPECT_EQ(s.intervals(q), (std::vector<StateInterval>{{100, 500, q, I(42)}}));
    EXPECT_EQ(s.seal(500), SealResult::already_sealed);
    EXPECT_EQ(s.seal(900), SealResult::already_sealed);
    EXPECT_EQ(s.seal_end(), 500u);
}

TEST(Seal, BeforeLastEventIsOrdering)
{
    StateSystem s;
    s.apply_event(make_sched_switch(100, 0, 0, 1));
    EXPECT_ERRC(s.seal(50), Errc::ordering);
}

TEST(QueryPoint, Examples)
{
    Quark q = 0;
    const auto s = two_interval_system(q);
    EXPECT_EQ(s.query_point(q, 150), I(2));
    EXPECT_EQ(s.query_point(q, 99), I(1));
    EXPECT_EQ(s.query_point(q, 100), I(2));
    EXPECT_EQ(s.query_point(q, 0), I(1));
}

TEST(QueryPoint, Errors)
{
    Quark q = 0;
    const auto s = two_interval_system(q);
    EXPECT_ERRC(s.query_point(q, 300), Errc::range);
    EXPECT_ERRC(s.query_point(99, 10), Errc::lookup);
    StateSystem open;
    const Quark oq = open.get_or_create_quark(AttributePath::parse("/a"));
    EXPECT_ERRC(open.query_point(oq, 0), Errc::precondition);
}

TEST(QueryPoint, BeforeFirstWriteIsNull)
{
    StateSystem s;
    const Quark q = s.get_or_create_quark(AttributePath::parse("/a"));
    s.modify_attribute(q, I(3), 50);
    s.seal(100);
    EXPECT_EQ(s.query_point(q, 10), kNull);
    EXPECT_EQ(s.query_point(q, 50), I(3));
}

TEST(QueryRange, Clipping)
{
    Quark q = 0;
    const auto s = two_interval_system(q);
    EXPECT_EQ(s.query_range(q, 50, 150), (std::vector<StateInterval>{{50, 100, q, I(1)}, {100, 150, q, I(2)}}));
}

TEST(QueryRange, ExactIntervalUnclipped)
{
    Quark q = 0;
    const auto s = two_interval_system(q);
    EXPECT_EQ(s.query_range(q, 100, 300), (std::vector<StateInterval>{{100, 300, q, I(2)}}));
    EXPECT_ERRC(s.query_range(q, 100, 301), Errc::range);
    EXPECT_ERRC(s.query_range(q, 100, 100), Errc::range);
}

TEST(StateSystem, KnownCpusAndSnapshot)
{
    const std::vector<Event> events{make_sched_switch(0, 2, 0, 7), make_sched_switch(10, 0, 0, 8)};
    const auto s = build_state_system(events, 20);
    EXPECT_EQ(s.known_cpus(), (std::vector<CpuId>{0, 2}));
    const auto snap = s.snapshot_json();
    EXPECT_NE(snap.find("\"/CPUs/2/Current_thread\""), std::string::npos);
    EXPECT_NE(snap.find("\"intervals\""), std::string::npos);
}

TEST(StateSystem, ReplayEquivalenceOnRandomTraces)
{
    std::mt19937_64 rng(4242);
    for (int round = 0; round < 100; ++round) {
        const auto trace = test::random_trace(rng, 1 + round % 4, 2 + round % 10, 500);
        const auto s = build_state_system(trace.events, trace.end);
        for (int probe = 0; probe < 50; ++probe) {
            const Timestamp t = std::uniform_int_distribution<Timestamp>(0, trace.end - 1)(rng);
            std::set<Tid> running;
            for (CpuId cpu = 0; cpu < trace.cpus; ++cpu) {
                const Tid expected = test::naive_thread_at(trace.events, cpu, t);
                const auto q = s.find_quark(cpu_current_thread_path(cpu));
                const StateValue got = q ? s.query_point(*q, t) : kNull;
                ASSERT_EQ(got, expected == kIdleTid ? kNull : I(expected)) << "round " << round << " t " << t;
                if (expected != kIdleTid) {
                    ASSERT_TRUE(running.insert(expected).second) << "thread on two CPUs";
                }
            }
        }
    }
}
