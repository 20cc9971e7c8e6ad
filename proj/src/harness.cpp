#include "tracekg/harness.hpp"

#include "tracekg/error.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include "json.hpp"

namespace tracekg {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

PromptEnvelope ground_question(std::string_view question, const QueryScope& scope, Grounding grounding,
                               const Analytics& analytics, const std::vector<Event>* events)
{
    switch (grounding) {
    case Grounding::taaf:
    case Grounding::taaf_no_schema: {
        const auto graph = build_graph(analytics, scope);
        return assemble_prompt(build_schema(graph), serialize_graph(graph), question,
                               grounding == Grounding::taaf);
    }
    case Grounding::baseline: return assemble_baseline_prompt(make_baseline_input(analytics, scope), question);
    case Grounding::events:
        if (events == nullptr) {
            throw Error(Errc::precondition, "events grounding needs the raw event list");
        }
        analytics.check(scope.window);
        return assemble_events_prompt(make_events_input(*events, scope.window), question);
    }
    throw Error(Errc::validation, "unhandled grounding");
}

GridSpec default_grid(std::vector<std::string> models)
{
    constexpr Duration s1 = 1'000'000'000ULL;
    GridSpec grid;
    grid.models = std::move(models);
    grid.windows = {s1, 10 * s1, 100 * s1};
    grid.locations = {TemporalLocation::start, TemporalLocation::mid, TemporalLocation::end};
    grid.groundings = {Grounding::baseline, Grounding::taaf};
    grid.temperatures = {0.5};
    grid.samples = 3;
    return grid;
}

std::vector<double> temperature_sweep() { return {0.1, 0.3, 0.5, 0.7, 0.9}; }

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

struct Cell {
    std::string model;
    double temperature = 0.0;
    Duration window = 0;
    TemporalLocation loc = TemporalLocation::mid;
    Grounding grounding = Grounding::taaf;
    std::string key;
};

struct CellResult {
    bool complete = false;
    bool resumed = false;
    std::string error;
    std::vector<ScoredResponse> responses;
};

json response_json(const ScoredResponse& r)
{
    return json{{"item", r.item_id},          {"sample", r.sample_index}, {"score", r.score},
                {"extracted", r.extracted},   {"raw", r.raw_text},        {"extraction_failed", r.extraction_failed}};
}

ScoredResponse response_from_json(const json& j)
{
    ScoredResponse r;
    r.item_id = j.at("item").get<std::string>();
    r.sample_index = j.at("sample").get<int>();
    r.score = j.at("score").get<double>();
    r.extracted = j.at("extracted").get<std::string>();
    r.raw_text = j.at("raw").get<std::string>();
    r.extraction_failed = j.at("extraction_failed").get<bool>();
    return r;
}

class ResumeState {
public:
    explicit ResumeState(std::optional<std::filesystem::path> path) : path_(std::move(path))
    {
        if (!path_ || !std::filesystem::exists(*path_)) {
            return;
        }
        std::ifstream in(*path_);
        try {
            doc_ = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error(Errc::format, fmt::format("state file '{}' does not parse: {}", path_->string(), e.what()));
        }
        if (!doc_.is_object() || !doc_.contains("cells") || !doc_["cells"].is_object()) {
            throw Error(Errc::format, fmt::format("state file '{}' has no cells object", path_->string()));
        }
    }

    std::optional<std::vector<ScoredResponse>> find(const std::string& key) const
    {
        std::lock_guard lock(mutex_);
        if (!doc_.contains("cells") || !doc_["cells"].contains(key)) {
            return std::nullopt;
        }
        std::vector<ScoredResponse> out;
        for (const auto& r : doc_["cells"][key]) {
            out.push_back(response_from_json(r));
        }
        return out;
    }

    void store(const std::string& key, const std::vector<ScoredResponse>& responses)
    {
        std::lock_guard lock(mutex_);
        json list = json::array();
        for (const auto& r : responses) {
            list.push_back(response_json(r));
        }
        doc_["cells"][key] = std::move(list);
        if (!path_) {
            return;
        }
        const auto tmp = std::filesystem::path(path_->string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw Error(Errc::io, fmt::format("cannot write state file '{}'", tmp.string()));
            }
            out << doc_.dump(1) << '\n';
        }
        std::filesystem::rename(tmp, *path_);
    }

private:
    std::optional<std::filesystem::path> path_;
    json doc_ = json{{"cells", json::object()}};
    mutable std::mutex mutex_;
};

std::string cell_key(const Cell& cell, const GridSpec& grid, const TraceContext& trace, const std::string& items_hash,
                     const LlmConfig& base)
{
    const ordered_json j{{"model", cell.model},
                         {"temperature", cell.temperature},
                         {"samples", grid.samples},
                         {"window_ns", cell.window},
                         {"loc", to_string(cell.loc)},
                         {"grounding", to_string(cell.grounding)},
                         {"max_output_tokens", base.max_output_tokens},
                         {"options", base.options_json},
                         {"trace", trace.trace_id},
                         {"items", items_hash}};
    return sha256_hex(j.dump());
}

CellResult run_cell(const Cell& cell, const std::vector<BenchmarkItem>& items, const GridSpec& grid,
                    const TraceContext& trace, Bridge& bridge, const LlmConfig& base)
{
    CellResult result;
    try {
        const Window window = window_for_location(trace.meta, cell.loc, cell.window);
        LlmConfig cfg = base;
        cfg.model = cell.model;
        cfg.temperature = cell.temperature;
        cfg.samples = grid.samples;
        cfg.schema_enabled = cell.grounding != Grounding::taaf_no_schema;
        for (const auto& item : items) {
            const auto reference = resolve_reference(item, *trace.analytics, window);
            const auto envelope =
                ground_question(item.prompt, scope_for_window(item, window), cell.grounding, *trace.analytics);
            for (const auto& answer : bridge.ask(envelope, cfg)) {
                result.responses.push_back(score_response(answer.raw_text, item, reference, answer.sample_index));
            }
        }
        result.complete = true;
    } catch (const std::exception& e) {
        result.error = e.what();
        result.responses.clear();
    }
    return result;
}

struct RowKey {
    AnswerFormat format;
    HopScope hop;
    auto operator<=>(const RowKey&) const = default;
};

} // namespace

GridReport run_grid(const std::vector<BenchmarkItem>& items, const GridSpec& grid, const TraceContext& trace,
                    Bridge& bridge, const LlmConfig& base, const GridOptions& options)
{
    if (trace.analytics == nullptr) {
        throw Error(Errc::precondition, "grid needs analytics over the target trace");
    }
    if (items.empty()) {
        throw Error(Errc::validation, "grid needs at least one item");
    }
    if (grid.models.empty() || grid.windows.empty() || grid.locations.empty() || grid.groundings.empty() ||
        grid.temperatures.empty()) {
        throw Error(Errc::validation, "every grid axis needs at least one value");
    }
    if (grid.samples < 1) {
        throw Error(Errc::validation, "samples must be at least 1");
    }
    for (auto g : grid.groundings) {
        if (g == Grounding::events) {
            throw Error(Errc::validation, "the events grounding is not a grid configuration; use `ask`");
        }
    }

    const std::string items_hash = sha256_hex(serialize_benchmark(items));
    std::vector<Cell> cells;
    for (const auto& model : grid.models) {
        for (double temperature : grid.temperatures) {
            for (Duration window : grid.windows) {
                for (auto loc : grid.locations) {
                    for (auto grounding : grid.groundings) {
                        Cell cell{model, temperature, window, loc, grounding, {}};
                        cell.key = cell_key(cell, grid, trace, items_hash, base);
                        cells.push_back(std::move(cell));
                    }
                }
            }
        }
    }

    ResumeState state(options.state_file);
    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            if (auto saved = state.find(cells[i].key)) {
                results[i] = CellResult{true, true, {}, std::move(*saved)};
                continue;
            }
            results[i] = run_cell(cells[i], items, grid, trace, bridge, base);
            if (results[i].complete) {
                state.store(cells[i].key, results[i].responses);
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallel_cells, cells.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    std::map<std::string, const BenchmarkItem*> by_id;
    for (const auto& item : items) {
        by_id[item.id] = &item;
    }
    const bool sweep = grid.temperatures.size() > 1;

    GridReport report;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        auto& res = results[i];
        report.cells.push_back(CellStatus{cell.key, cell.model, cell.temperature, cell.window, cell.loc,
                                          cell.grounding, res.complete, res.resumed, res.error});
        if (!res.complete) {
            continue;
        }
        std::map<RowKey, std::vector<double>> scores;
        std::map<RowKey, std::map<std::string, std::vector<double>>> per_item;
        for (const auto& r : res.responses) {
            const auto it = by_id.find(r.item_id);
            if (it == by_id.end()) {
                throw Error(Errc::validation, fmt::format("response for unknown item '{}'", r.item_id));
            }
            const RowKey key{it->second->answer_format, it->second->hop_scope};
            scores[key].push_back(r.score);
            per_item[key][r.item_id].push_back(r.score);
        }
        for (const auto& [key, list] : scores) {
            GridRow row;
            row.model = sweep ? fmt::format("{}@t={}", cell.model, cell.temperature) : cell.model;
            row.window_ns = cell.window;
            row.loc = cell.loc;
            row.grounding = cell.grounding;
            row.format = key.format;
            row.hop = key.hop;
            row.n = list.size();
            for (double s : list) {
                (s == 0.0 ? row.n0 : s == 0.5 ? row.n05 : row.n1) += 1;
            }
            const auto n = static_cast<double>(row.n);
            row.pct0 = round2(100.0 * static_cast<double>(row.n0) / n);
            row.pct05 = round2(100.0 * static_cast<double>(row.n05) / n);
            row.pct1 = round2(100.0 * static_cast<double>(row.n1) / n);
            row.accuracy = round2(accuracy(list));
            double total = 0.0;
            for (const auto& [id, samples] : per_item[key]) {
                total += consistency(samples);
            }
            row.consistency = round2(total / static_cast<double>(per_item[key].size()));
            report.rows.push_back(std::move(row));
        }
        for (auto& r : res.responses) {
            report.responses.push_back(std::move(r));
        }
    }
    return report;
}

std::string report_csv(const GridReport& report)
{
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const auto& row : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{}\n", row.model, row.window_ns,
                           to_string(row.loc), to_string(row.grounding), to_string(row.format), to_string(row.hop),
                           row.pct0, row.pct05, row.pct1, row.accuracy, row.consistency, row.n);
    }
    return out;
}

std::string report_json(const GridReport& report)
{
    ordered_json doc;
    doc["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
        doc["rows"].push_back(ordered_json{{"model", row.model},
                                           {"window_ns", row.window_ns},
                                           {"loc", to_string(row.loc)},
                                           {"grounding", to_string(row.grounding)},
                                           {"format", to_string(row.format)},
                                           {"hop", to_string(row.hop)},
                                           {"pct0", row.pct0},
                                           {"pct05", row.pct05},
                                           {"pct1", row.pct1},
                                           {"accuracy", row.accuracy},
                                           {"consistency", row.consistency},
                                           {"n", row.n}});
    }
    doc["incomplete"] = ordered_json::array();
    for (const auto& cell : report.cells) {
        if (cell.complete) {
            continue;
        }
        doc["incomplete"].push_back(ordered_json{{"model", cell.model},
                                                 {"temperature", cell.temperature},
                                                 {"window_ns", cell.window_ns},
                                                 {"loc", to_string(cell.loc)},
                                                 {"grounding", to_string(cell.grounding)},
                                                 {"error", cell.error}});
    }
    return doc.dump(2) + "\n";
}

void write_reports(const GridReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::io, fmt::format("cannot write '{}'", path.string()));
        }
        out << text;
    };
    write(dir / "report.csv", report_csv(report));
    write(dir / "report.json", report_json(report));
}

// ---------------------------------------------------------------------------
// Offline models

namespace {

std::string render_number(const NumericReference& n)
{
    if (n.unit.empty() || n.unit == "ns") {
        return fmt::format("{} {}", static_cast<std::uint64_t>(std::llround(n.value)), n.unit);
    }
    return fmt::format("{} {}", n.value, n.unit);
}

const BenchmarkItem& item_for(const std::vector<BenchmarkItem>& items, const std::string& question)
{
    for (const auto& item : items) {
        if (item.prompt == question) {
            return item;
        }
    }
    throw Error(Errc::lookup, "mock model: no benchmark item has this question");
}

/// The reference the prompt's own context supports.
ReferenceAnswer answer_from_prompt(const std::vector<BenchmarkItem>& items, const std::string& prompt)
{
    json envelope;
    try {
        envelope = json::parse(prompt);
    } catch (const json::parse_error&) {
        throw Error(Errc::format, "mock model: prompt is not an envelope");
    }
    const auto& item = item_for(items, envelope.at("user query").get<std::string>());
    if (!item.reference.query) {
        return item.reference;
    }
    WindowFacts facts;
    if (envelope.contains("graph")) {
        facts = facts_from_graph(deserialize_graph(ordered_json(envelope["graph"]).dump()));
    } else if (envelope.contains("state values")) {
        facts = facts_from_baseline(envelope["state values"].get<std::string>());
    } else {
        throw Error(Errc::validation, "mock model: raw events are not supported");
    }
    return reference_from_result(item, evaluate(*item.reference.query, facts));
}

std::string other_entity(const std::string& id)
{
    const auto colon = id.find(':');
    if (colon == std::string::npos) {
        return "thread:1";
    }
    return fmt::format("{}:{}", id.substr(0, colon), std::stoll(id.substr(colon + 1)) + 1);
}

ReferenceAnswer make_wrong(ReferenceAnswer ref)
{
    std::visit(
        [](auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, NumericReference>) {
                a.value = a.value * 3.0 + 1000.0;
            } else if constexpr (std::is_same_v<T, BooleanReference>) {
                a.value = !a.value;
            } else if constexpr (std::is_same_v<T, ChoiceReference>) {
                for (std::size_t i = 0; i < a.options.size(); ++i) {
                    if (a.options[i].label == a.letter) {
                        a.letter = a.options[(i + 1) % a.options.size()].label;
                        break;
                    }
                }
            } else {
                a.canonical = other_entity(a.canonical);
                a.quantity.reset();
            }
        },
        ref.answer);
    return ref;
}

} // namespace

std::string render_answer(const ReferenceAnswer& reference)
{
    return std::visit(
        [](const auto& a) -> std::string {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, NumericReference>) {
                return fmt::format("The answer is {}.", render_number(a));
            } else if constexpr (std::is_same_v<T, BooleanReference>) {
                return a.value ? "True." : "False.";
            } else if constexpr (std::is_same_v<T, ChoiceReference>) {
                for (const auto& o : a.options) {
                    if (o.label == a.letter) {
                        return fmt::format("({}) {}", o.label, o.text);
                    }
                }
                return fmt::format("({})", a.letter);
            } else {
                std::string text = display_name(a.canonical);
                if (a.quantity) {
                    text += fmt::format(", with {}", render_number(*a.quantity));
                }
                return text + ".";
            }
        },
        reference.answer);
}

OracleMockModel::OracleMockModel(std::vector<BenchmarkItem> items) : items_(std::move(items)) {}

Completion OracleMockModel::complete(const std::string& prompt, const LlmConfig&, int)
{
    return Completion{render_answer(answer_from_prompt(items_, prompt)), {}, {}};
}

WrongMockModel::WrongMockModel(std::vector<BenchmarkItem> items) : items_(std::move(items)) {}

Completion WrongMockModel::complete(const std::string& prompt, const LlmConfig&, int)
{
    return Completion{render_answer(make_wrong(answer_from_prompt(items_, prompt))), {}, {}};
}

} // namespace tracekg
