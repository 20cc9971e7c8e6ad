#include "tracekg/cli.hpp"

#include "tracekg/benchmark.hpp"
#include "tracekg/error.hpp"
#include "tracekg/harness.hpp"
#include "tracekg/llm_bridge.hpp"
#include "tracekg/scoring.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include "CLI11.hpp"
#include "json.hpp"

namespace tracekg {

Duration parse_duration(std::string_view text)
{
    const auto bad = [&] { return Error(Errc::parse, fmt::format("bad duration '{}'", text)); };
    std::size_t split = 0;
    while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.')) {
        ++split;
    }
    if (split == 0) {
        throw bad();
    }
    const std::string number(text.substr(0, split));
    const auto unit = text.substr(split);
    double factor = 0.0;
    if (unit.empty() || unit == "ns") {
        factor = 1.0;
    } else if (unit == "us") {
        factor = 1e3;
    } else if (unit == "ms") {
        factor = 1e6;
    } else if (unit == "s") {
        factor = 1e9;
    } else if (unit == "m") {
        factor = 60e9;
    } else {
        throw bad();
    }
    if (number.find('.') == std::string::npos) {
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
        if (ec != std::errc{} || ptr != number.data() + number.size()) {
            throw bad();
        }
        const auto f = static_cast<std::uint64_t>(factor);
        if (value != 0 && f > UINT64_MAX / value) {
            throw Error(Errc::parse, fmt::format("duration '{}' overflows", text));
        }
        return value * f;
    }
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(number, &used);
        if (used != number.size()) {
            throw bad();
        }
    } catch (const std::logic_error&) {
        throw bad();
    }
    return static_cast<Duration>(std::llround(value * factor));
}

std::pair<Timestamp, Timestamp> parse_time_range(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw Error(Errc::parse, fmt::format("range '{}' must look like START:END", text));
    }
    return {parse_duration(text.substr(0, colon)), parse_duration(text.substr(colon + 1))};
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sealed state plus analytics for one trace file.
struct LoadedModel {
    TraceMeta meta;
    StateSystem state;
    std::unique_ptr<Analytics> analytics;
};

std::unique_ptr<LoadedModel> load_model(const std::string& path)
{
    auto loaded = load_trace(path);
    auto model = std::make_unique<LoadedModel>();
    model->meta = loaded.meta;
    model->state = build_state_system(*loaded.events, loaded.meta.end);
    model->analytics = std::make_unique<Analytics>(model->state, loaded.meta.cpu_count);
    return model;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io, fmt::format("cannot open '{}'", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::io, fmt::format("cannot write '{}'", path));
    }
    out << text;
}

class Banner {
public:
    explicit Banner(std::string command) : text_("# tracekg " + std::move(command)) {}

    template <typename T>
    Banner& add(std::string_view key, const T& value)
    {
        text_ += fmt::format(" {}={}", key, value);
        return *this;
    }

    void print(std::ostream& err) const { err << text_ << '\n'; }

private:
    std::string text_;
};

std::string join(const std::vector<std::string>& items) { return fmt::format("{}", fmt::join(items, ",")); }

struct ScopeFlags {
    std::string loc = "mid";
    std::string window;
    std::string range;
    std::vector<CpuId> cpus;
    std::vector<Tid> tids;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--loc", loc, "Window placement: start, mid or end")->capture_default_str();
        cmd->add_option("--window", window, "Window length, e.g. 1s, 10s, 100s");
        cmd->add_option("--range", range, "Explicit window START:END, e.g. 30s:40s (overrides --loc/--window)");
        cmd->add_option("--cpus", cpus, "Restrict to these CPUs")->delimiter(',');
        cmd->add_option("--tids", tids, "Restrict to these thread ids")->delimiter(',');
    }

    QueryScope resolve(const TraceMeta& meta) const
    {
        QueryScope scope;
        if (!range.empty()) {
            const auto [t1, t2] = parse_time_range(range);
            scope.window = Window{t1, t2};
        } else {
            if (window.empty()) {
                throw UsageError("--window or --range is required");
            }
            scope.window = window_for_location(meta, parse_temporal_location(loc), parse_duration(window));
        }
        if (!cpus.empty()) {
            scope.cpus = std::set<CpuId>(cpus.begin(), cpus.end());
        }
        if (!tids.empty()) {
            scope.tids = std::set<Tid>(tids.begin(), tids.end());
        }
        return scope;
    }

    void describe(Banner& banner, const QueryScope& scope) const
    {
        banner.add("t1_ns", scope.window.t1).add("t2_ns", scope.window.t2);
        if (scope.cpus) {
            banner.add("cpus", fmt::format("{}", fmt::join(*scope.cpus, ",")));
        }
        if (scope.tids) {
            banner.add("tids", fmt::format("{}", fmt::join(*scope.tids, ",")));
        }
    }
};

struct ModelFlags {
    std::string model = LlmConfig{}.model;
    double temperature = LlmConfig{}.temperature;
    int samples = LlmConfig{}.samples;
    std::string endpoint = LlmConfig{}.endpoint;
    std::size_t max_context_tokens = LlmConfig{}.max_context_tokens;
    int max_output_tokens = LlmConfig{}.max_output_tokens;
    int timeout_s = static_cast<int>(LlmConfig{}.timeout.count());
    std::string api_key_env = LlmConfig{}.api_key_env;
    std::string replay;
    std::string record;
    std::size_t in_flight = 4;

    void attach(CLI::App* cmd, bool per_run_model)
    {
        if (per_run_model) {
            cmd->add_option("--model", model, "Model name")->capture_default_str();
            cmd->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
        }
        cmd->add_option("--samples", samples, "Answers drawn per question")->capture_default_str();
        cmd->add_option("--endpoint", endpoint, "Chat-completion endpoint URL")->capture_default_str();
        cmd->add_option("--max-context-tokens", max_context_tokens, "Reject prompts estimated above this size")
            ->capture_default_str();
        cmd->add_option("--max-output-tokens", max_output_tokens, "Completion token cap")->capture_default_str();
        cmd->add_option("--timeout", timeout_s, "Per-request timeout in seconds")->capture_default_str();
        cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the API key")
            ->capture_default_str();
        auto* replay_opt = cmd->add_option("--replay", replay, "Answer only from this cassette (no network)");
        auto* record_opt = cmd->add_option("--record", record, "Call the model and store answers in this cassette");
        replay_opt->excludes(record_opt);
        cmd->add_option("--in-flight", in_flight, "Concurrent model calls")->capture_default_str();
    }

    LlmConfig config() const
    {
        LlmConfig cfg;
        cfg.model = model;
        cfg.temperature = temperature;
        cfg.samples = samples;
        cfg.endpoint = endpoint;
        cfg.max_context_tokens = max_context_tokens;
        cfg.max_output_tokens = max_output_tokens;
        cfg.timeout = std::chrono::seconds(timeout_s);
        cfg.api_key_env = api_key_env;
        return cfg;
    }

    std::unique_ptr<Bridge> bridge(std::shared_ptr<ModelClient> client) const
    {
        if (!replay.empty()) {
            return Bridge::replay(replay, in_flight);
        }
        if (!client) {
            client = std::make_shared<ChatCompletionClient>(std::make_shared<HttplibTransport>());
        }
        if (!record.empty()) {
            return Bridge::record(std::move(client), record, in_flight);
        }
        return Bridge::live(std::move(client), in_flight);
    }

    std::string mode() const { return !replay.empty() ? "replay" : !record.empty() ? "record" : "live"; }

    void describe(Banner& banner, const LlmConfig& cfg) const
    {
        banner.add("mode", mode()).add("samples", cfg.samples).add("endpoint", cfg.endpoint);
        banner.add("max_context_tokens", cfg.max_context_tokens).add("max_output_tokens", cfg.max_output_tokens);
        if (!replay.empty()) {
            banner.add("cassette", replay);
        }
        if (!record.empty()) {
            banner.add("cassette", record);
        }
    }
};

// ---------------------------------------------------------------------------

struct GenFlags {
    std::uint64_t seed = 1;
    std::uint32_t cpus = 2;
    std::uint32_t threads = 4;
    std::string duration;
    std::string mean_slice = "10ms";
    double skew = 0.0;
    std::string out;
};

int cmd_gen(const GenFlags& f, std::ostream& out, std::ostream& err)
{
    WorkloadSpec spec;
    spec.seed = f.seed;
    spec.cpu_count = f.cpus;
    spec.thread_count = f.threads;
    spec.duration = parse_duration(f.duration);
    spec.mean_slice = parse_duration(f.mean_slice);
    spec.skew = f.skew;
    Banner("gen")
        .add("seed", spec.seed)
        .add("cpus", spec.cpu_count)
        .add("threads", spec.thread_count)
        .add("duration_ns", spec.duration)
        .add("mean_slice_ns", spec.mean_slice)
        .add("skew", spec.skew)
        .add("out", f.out)
        .print(err);
    validate(spec);
    {
        std::ofstream file(f.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw Error(Errc::io, fmt::format("cannot write '{}'", f.out));
        }
        SyntheticTraceGenerator gen(spec);
        write_trace(file, gen);
    }
    const auto content = read_file(f.out);
    const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
    fmt::print(out, "wrote {} events to {} sha256={}\n", lines, f.out, sha256_hex(content));
    return 0;
}

int cmd_ingest(const std::string& trace, const std::string& snapshot, std::ostream& out, std::ostream& err)
{
    Banner("ingest").add("trace", trace).add("snapshot", snapshot.empty() ? "-" : snapshot).print(err);
    const auto model = load_model(trace);
    std::size_t intervals = 0;
    for (Quark q = 0; q < model->state.quark_count(); ++q) {
        intervals += model->state.interval_count(q);
    }
    fmt::print(out, "events {}\ncpus {}\nextent_ns [0, {})\nquarks {}\nintervals {}\nskipped_events {}\n",
               model->meta.event_count, model->meta.cpu_count, model->meta.end, model->state.quark_count(), intervals,
               model->state.skipped_events());
    if (!snapshot.empty()) {
        write_file(snapshot, model->state.snapshot_json() + "\n");
    }
    return 0;
}

int cmd_state(const std::string& trace, const std::string& path, const std::string& at, const std::string& range,
              std::ostream& out, std::ostream& err)
{
    Banner banner("state");
    banner.add("trace", trace).add("path", path);
    if (!at.empty()) {
        banner.add("at_ns", parse_duration(at));
    } else {
        const auto [t1, t2] = parse_time_range(range);
        banner.add("t1_ns", t1).add("t2_ns", t2);
    }
    banner.print(err);
    const auto model = load_model(trace);
    const auto attr = AttributePath::parse(path);
    const auto quark = model->state.find_quark(attr);
    if (!quark) {
        throw Error(Errc::lookup, fmt::format("no attribute at '{}'", path));
    }
    if (!at.empty()) {
        const auto t = parse_duration(at);
        fmt::print(out, "{}\t{}\t{}\n", attr.str(), t, model->state.query_point(*quark, t).to_text());
        return 0;
    }
    const auto [t1, t2] = parse_time_range(range);
    fmt::print(out, "start_ns\tend_ns\tvalue\n");
    for (const auto& iv : model->state.query_range(*quark, t1, t2)) {
        fmt::print(out, "{}\t{}\t{}\n", iv.start, iv.end, iv.value.to_text());
    }
    return 0;
}

int cmd_kg(const std::string& trace, const ScopeFlags& scope_flags, bool with_schema, const std::string& output,
           std::ostream& out, std::ostream& err)
{
    const auto model = load_model(trace);
    const auto scope = scope_flags.resolve(model->meta);
    Banner banner("kg");
    banner.add("trace", trace);
    scope_flags.describe(banner, scope);
    banner.add("schema", with_schema).add("out", output.empty() ? "-" : output).print(err);

    const auto graph = build_graph(*model->analytics, scope);
    std::string text;
    if (with_schema) {
        nlohmann::ordered_json doc{{"schema", build_schema(graph).text},
                                   {"graph", nlohmann::ordered_json::parse(serialize_graph(graph))}};
        text = doc.dump() + "\n";
    } else {
        text = serialize_graph(graph) + "\n";
    }
    if (output.empty()) {
        out << text;
    } else {
        write_file(output, text);
    }
    return 0;
}

struct AskFlags {
    std::string question;
    std::string trace;
    ScopeFlags scope;
    ModelFlags model;
    std::string grounding = "taaf";
    bool no_schema = false;
    bool dump_prompt = false;
    std::string mock_answer;
};

int cmd_ask(const AskFlags& f, std::ostream& out, std::ostream& err)
{
    const auto model = load_model(f.trace);
    const auto scope = f.scope.resolve(model->meta);
    Grounding grounding = parse_grounding(f.grounding);
    if (f.no_schema && grounding == Grounding::taaf) {
        grounding = Grounding::taaf_no_schema;
    }
    LlmConfig cfg = f.model.config();
    cfg.schema_enabled = grounding != Grounding::taaf_no_schema;

    Banner banner("ask");
    banner.add("trace", f.trace).add("grounding", to_string(grounding));
    f.scope.describe(banner, scope);
    banner.add("model", cfg.model).add("temperature", cfg.temperature);
    f.model.describe(banner, cfg);
    banner.print(err);

    std::vector<Event> events;
    if (grounding == Grounding::events) {
        auto loaded = load_trace(f.trace);
        events = drain(*loaded.events);
    }
    const auto envelope = ground_question(f.question, scope, grounding, *model->analytics, &events);
    if (f.dump_prompt) {
        out << envelope.serialize() << '\n';
        return 0;
    }
    validate(cfg);
    std::shared_ptr<ModelClient> client;
    if (!f.mock_answer.empty()) {
        client = std::make_shared<FixedAnswerModel>(f.mock_answer);
    }
    auto bridge = f.model.bridge(client);
    for (const auto& answer : bridge->ask(envelope, cfg)) {
        fmt::print(out, "[sample {}] {}\n", answer.sample_index, answer.raw_text);
    }
    return 0;
}

struct BenchFlags {
    std::string benchmark;
    std::string trace;
    std::vector<std::string> models{"gpt-4o"};
    std::vector<std::string> windows{"1s", "10s", "100s"};
    std::vector<std::string> locs{"start", "mid", "end"};
    std::vector<std::string> groundings{"baseline", "taaf"};
    std::vector<double> temperatures{0.5};
    bool temperature_sweep = false;
    ModelFlags model;
    std::string mock;
    std::string out_dir = ".";
    std::string state_file;
    std::size_t parallel = 1;
    bool check_fixtures = false;
    std::string fixture_file;
};

int cmd_check_fixtures(const BenchFlags& f, std::ostream& out, std::ostream& err)
{
    constexpr double tol = 0.01;
    Banner("bench --check-fixtures")
        .add("fixtures", f.fixture_file.empty() ? "built-in" : f.fixture_file)
        .add("tolerance", tol)
        .print(err);
    const auto rows = f.fixture_file.empty() ? reference_rows() : load_reference_rows_csv(f.fixture_file);
    // Printed values carry two decimals; the slack absorbs binary rounding only.
    const auto mismatches = check_reference_rows(rows, tol + 1e-9);
    for (const auto& m : mismatches) {
        fmt::print(out, "MISMATCH {} {} {} {} {}: 0.5*{:.2f} + {:.2f} = {:.3f}, printed {:.2f}\n", m.row.model,
                   m.row.interval, m.row.format, m.row.hop, m.row.input, m.row.pct05, m.row.pct1, m.computed,
                   m.row.expected_acc);
    }
    fmt::print(out, "checked {} triples ({} table rows): {} within +-{}, {} outside\n", rows.size(), rows.size() / 2,
               rows.size() - mismatches.size(), tol, mismatches.size());
    return mismatches.empty() ? 0 : 1;
}

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err)
{
    if (f.check_fixtures) {
        return cmd_check_fixtures(f, out, err);
    }
    if (f.benchmark.empty() || f.trace.empty()) {
        throw UsageError("--benchmark and --trace are required unless --check-fixtures is given");
    }
    GridSpec grid;
    grid.models = f.models;
    for (const auto& w : f.windows) {
        grid.windows.push_back(parse_duration(w));
    }
    for (const auto& l : f.locs) {
        grid.locations.push_back(parse_temporal_location(l));
    }
    for (const auto& g : f.groundings) {
        grid.groundings.push_back(parse_grounding(g));
    }
    grid.temperatures = f.temperature_sweep ? temperature_sweep() : f.temperatures;
    grid.samples = f.model.samples;
    LlmConfig base = f.model.config();

    Banner banner("bench");
    banner.add("benchmark", f.benchmark).add("trace", f.trace).add("models", join(f.models));
    banner.add("windows", join(f.windows)).add("locs", join(f.locs)).add("groundings", join(f.groundings));
    banner.add("temperatures", fmt::format("{}", fmt::join(grid.temperatures, ",")));
    f.model.describe(banner, base);
    banner.add("mock", f.mock.empty() ? "-" : f.mock).add("out_dir", f.out_dir);
    banner.add("state_file", f.state_file.empty() ? "-" : f.state_file).add("parallel", f.parallel);
    banner.print(err);

    const auto items = load_benchmark(f.benchmark);
    const auto model = load_model(f.trace);
    TraceContext ctx{model->analytics.get(), model->meta, sha256_hex(read_file(f.trace))};

    std::shared_ptr<ModelClient> client;
    if (f.mock == "oracle") {
        client = std::make_shared<OracleMockModel>(items);
    } else if (f.mock == "wrong") {
        client = std::make_shared<WrongMockModel>(items);
    } else if (!f.mock.empty()) {
        throw UsageError(fmt::format("--mock must be oracle or wrong, not '{}'", f.mock));
    }
    auto bridge = f.model.bridge(client);

    GridOptions options;
    if (!f.state_file.empty()) {
        options.state_file = f.state_file;
    }
    options.parallel_cells = f.parallel;
    const auto report = run_grid(items, grid, ctx, *bridge, base, options);
    write_reports(report, f.out_dir);

    std::size_t complete = 0;
    std::size_t resumed = 0;
    for (const auto& cell : report.cells) {
        complete += cell.complete ? 1 : 0;
        resumed += cell.resumed ? 1 : 0;
        if (!cell.complete) {
            fmt::print(err, "cell incomplete: model={} t={} window_ns={} loc={} grounding={}: {}\n", cell.model,
                       cell.temperature, cell.window_ns, to_string(cell.loc), to_string(cell.grounding), cell.error);
        }
    }
    fmt::print(out, "cells {} complete {} resumed {} incomplete {}\nmodel calls {}\nreport {}\n", report.cells.size(),
               complete, resumed, report.cells.size() - complete, bridge->model_calls(),
               (std::filesystem::path(f.out_dir) / "report.csv").string());
    return complete == report.cells.size() ? 0 : 1;
}

int cmd_seed_bench(const std::string& output, const std::string& trace_out, std::ostream& out, std::ostream& err)
{
    const auto spec = seed_workload();
    Banner("seed-bench")
        .add("seed", spec.seed)
        .add("cpus", spec.cpu_count)
        .add("threads", spec.thread_count)
        .add("duration_ns", spec.duration)
        .add("mean_slice_ns", spec.mean_slice)
        .add("skew", spec.skew)
        .add("out", output)
        .add("trace_out", trace_out.empty() ? "-" : trace_out)
        .print(err);
    const auto events = generate_synthetic_trace(spec);
    const auto meta = compute_meta(events);
    const auto state = build_state_system(events, meta.end);
    const Analytics analytics(state, meta.cpu_count);
    write_file(output, serialize_benchmark(make_seed_benchmark(analytics, meta)));
    if (!trace_out.empty()) {
        std::ofstream file(trace_out, std::ios::binary | std::ios::trunc);
        VectorEventStream stream(events);
        write_trace(file, stream);
    }
    fmt::print(out, "wrote 12 items to {}\n", output);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Trace analysis pipeline: synthetic traces, state queries, knowledge graphs and LLM evaluation",
                 "tracekg"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scheduling trace");
    gen_cmd->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
    gen_cmd->add_option("--cpus", gen.cpus, "CPU count")->capture_default_str();
    gen_cmd->add_option("--threads", gen.threads, "Thread count")->capture_default_str();
    gen_cmd->add_option("--duration", gen.duration, "Trace length, e.g. 60s")->required();
    gen_cmd->add_option("--mean-slice", gen.mean_slice, "Mean scheduling slice")->capture_default_str();
    gen_cmd->add_option("--skew", gen.skew, "Bias toward one dominant thread per CPU, 0..1")->capture_default_str();
    gen_cmd->add_option("-o,--out", gen.out, "Output trace file")->required();

    std::string ingest_trace;
    std::string snapshot;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build the state system and print a summary");
    ingest_cmd->add_option("--trace", ingest_trace, "Trace file")->required();
    ingest_cmd->add_option("--snapshot", snapshot, "Also write the full state snapshot JSON here");

    std::string state_trace;
    std::string state_path;
    std::string state_at;
    std::string state_range;
    auto* state_cmd = app.add_subcommand("state", "Query one attribute of the state system");
    state_cmd->add_option("--trace", state_trace, "Trace file")->required();
    state_cmd->add_option("--path", state_path, "Attribute path, e.g. /CPUs/0/Current_thread")->required();
    auto* at_opt = state_cmd->add_option("--at", state_at, "Point query time, e.g. 30s");
    auto* range_opt = state_cmd->add_option("--range", state_range, "Range query START:END, e.g. 30s:40s");
    at_opt->excludes(range_opt);
    state_cmd->require_option(1, 3);

    std::string kg_trace;
    ScopeFlags kg_scope;
    bool kg_schema = false;
    std::string kg_out;
    auto* kg_cmd = app.add_subcommand("kg", "Build the query-scoped knowledge graph");
    kg_cmd->add_option("--trace", kg_trace, "Trace file")->required();
    kg_scope.attach(kg_cmd);
    kg_cmd->add_flag("--schema,!--no-schema", kg_schema, "Wrap the graph with its schema text");
    kg_cmd->add_option("-o,--out", kg_out, "Write here instead of stdout");

    AskFlags ask;
    auto* ask_cmd = app.add_subcommand("ask", "Ask one question about a trace window");
    ask_cmd->add_option("question", ask.question, "Question text")->required();
    ask_cmd->add_option("--trace", ask.trace, "Trace file")->required();
    ask.scope.attach(ask_cmd);
    ask.model.attach(ask_cmd, true);
    ask_cmd->add_option("--grounding", ask.grounding, "taaf, taaf_noschema, baseline or events")
        ->capture_default_str();
    ask_cmd->add_flag("--no-schema", ask.no_schema, "Send the graph without its schema text");
    ask_cmd->add_flag("--dump-prompt", ask.dump_prompt, "Print the exact prompt and exit");
    ask_cmd->add_option("--mock-answer", ask.mock_answer, "Offline model that always replies with this text");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run the evaluation grid or check the reference score fixture");
    bench_cmd->add_option("--benchmark", bench.benchmark, "Benchmark JSON file");
    bench_cmd->add_option("--trace", bench.trace, "Trace file");
    bench_cmd->add_option("--models", bench.models, "Model names")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--windows", bench.windows, "Window lengths")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--locs", bench.locs, "Window placements")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--groundings", bench.groundings, "baseline, taaf, taaf_noschema")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--temperatures", bench.temperatures, "Sampling temperatures")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_flag("--temperature-sweep", bench.temperature_sweep, "Use 0.1,0.3,0.5,0.7,0.9");
    bench.model.attach(bench_cmd, false);
    bench_cmd->add_option("--mock", bench.mock, "Offline model: oracle or wrong");
    bench_cmd->add_option("--out-dir", bench.out_dir, "Directory for report.csv and report.json")
        ->capture_default_str();
    bench_cmd->add_option("--state-file", bench.state_file, "Resumable progress file");
    bench_cmd->add_option("--parallel", bench.parallel, "Grid cells evaluated at once")->capture_default_str();
    bench_cmd->add_flag("--check-fixtures", bench.check_fixtures, "Recompute accuracy for the reference score rows");
    bench_cmd->add_option("--fixture-file", bench.fixture_file, "Fixture CSV instead of the built-in rows");

    std::string seed_out;
    std::string seed_trace_out;
    auto* seed_cmd = app.add_subcommand("seed-bench", "Write the 12-item seed benchmark for the seed workload");
    seed_cmd->add_option("-o,--out", seed_out, "Benchmark JSON output")->required();
    seed_cmd->add_option("--trace-out", seed_trace_out, "Also write the seed trace here");

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (gen_cmd->parsed()) {
            return cmd_gen(gen, out, err);
        }
        if (ingest_cmd->parsed()) {
            return cmd_ingest(ingest_trace, snapshot, out, err);
        }
        if (state_cmd->parsed()) {
            if (state_at.empty() == state_range.empty()) {
                throw UsageError("exactly one of --at or --range is required");
            }
            return cmd_state(state_trace, state_path, state_at, state_range, out, err);
        }
        if (kg_cmd->parsed()) {
            return cmd_kg(kg_trace, kg_scope, kg_schema, kg_out, out, err);
        }
        if (ask_cmd->parsed()) {
            return cmd_ask(ask, out, err);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench, out, err);
        }
        if (seed_cmd->parsed()) {
            return cmd_seed_bench(seed_out, seed_trace_out, out, err);
        }
    } catch (const UsageError& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return 2;
    } catch (const Error& e) {
        fmt::print(err, "{}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }
    return 2;
}

} // namespace tracekg
