#pragma once

#include "tracekg/benchmark.hpp"
#include "tracekg/llm_bridge.hpp"
#include "tracekg/scoring.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracekg {

/// Builds the model input for one question under one grounding. The events
/// grounding needs the raw event list; the others read the state system.
PromptEnvelope ground_question(std::string_view question, const QueryScope& scope, Grounding grounding,
                               const Analytics& analytics, const std::vector<Event>* events = nullptr);

struct GridSpec {
    std::vector<std::string> models;
    std::vector<Duration> windows;
    std::vector<TemporalLocation> locations;
    std::vector<Grounding> groundings;
    std::vector<double> temperatures;
    int samples = 3;
};

/// 1 s / 10 s / 100 s windows at start, mid and end, baseline and graph
/// grounding, temperature 0.5, three samples.
GridSpec default_grid(std::vector<std::string> models);

/// 0.1, 0.3, 0.5, 0.7, 0.9.
std::vector<double> temperature_sweep();

struct TraceContext {
    const Analytics* analytics = nullptr;
    TraceMeta meta;
    /// Identifies the trace in resumable-state keys (e.g. a content hash).
    std::string trace_id;
};

struct GridRow {
    std::string model;
    Duration window_ns = 0;
    TemporalLocation loc = TemporalLocation::mid;
    Grounding grounding = Grounding::taaf;
    AnswerFormat format = AnswerFormat::explanatory;
    HopScope hop = HopScope::single;
    double pct0 = 0.0;
    double pct05 = 0.0;
    double pct1 = 0.0;
    double accuracy = 0.0;
    double consistency = 0.0;
    std::size_t n = 0;
    std::size_t n0 = 0;
    std::size_t n05 = 0;
    std::size_t n1 = 0;
};

struct CellStatus {
    std::string key;
    std::string model;
    double temperature = 0.0;
    Duration window_ns = 0;
    TemporalLocation loc = TemporalLocation::mid;
    Grounding grounding = Grounding::taaf;
    bool complete = false;
    bool resumed = false;
    std::string error;
};

struct GridReport {
    std::vector<GridRow> rows;
    std::vector<CellStatus> cells;
    std::vector<ScoredResponse> responses;
};

struct GridOptions {
    /// Completed cells are stored here and skipped on the next run.
    std::optional<std::filesystem::path> state_file;
    /// Cells evaluated at once; the bridge's in-flight limit still applies.
    std::size_t parallel_cells = 1;
};

/// Runs every (model, temperature, window, location, grounding) cell. Each
/// cell places its window with window_for_location, re-derives references for
/// that window, asks `samples` times per item and scores every answer. Cell
/// failures are recorded in the report and the run moves on.
///
/// Percentages, accuracy and consistency are rounded to 2 decimals; a row's
/// consistency is the mean of its items' per-item consistency. When the grid
/// holds more than one temperature, the model column reads "model@t=0.3".
GridReport run_grid(const std::vector<BenchmarkItem>& items, const GridSpec& grid, const TraceContext& trace,
                    Bridge& bridge, const LlmConfig& base, const GridOptions& options = {});

inline constexpr std::string_view kReportCsvHeader =
    "model,window_ns,loc,grounding,format,hop,pct0,pct05,pct1,accuracy,consistency,n";

std::string report_csv(const GridReport& report);
std::string report_json(const GridReport& report);

/// Writes report.csv and report.json into `dir`.
void write_reports(const GridReport& report, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Offline models

/// Answers from whatever the prompt carries (graph or state values) by
/// running the matching item's oracle query on it. Items are matched on the
/// exact question text.
class OracleMockModel final : public ModelClient {
public:
    explicit OracleMockModel(std::vector<BenchmarkItem> items);
    Completion complete(const std::string& prompt, const LlmConfig& cfg, int sample_index) override;

private:
    std::vector<BenchmarkItem> items_;
};

/// Like OracleMockModel, then deliberately wrong: other option letter,
/// negated boolean, other entity, far-off number.
class WrongMockModel final : public ModelClient {
public:
    explicit WrongMockModel(std::vector<BenchmarkItem> items);
    Completion complete(const std::string& prompt, const LlmConfig& cfg, int sample_index) override;

private:
    std::vector<BenchmarkItem> items_;
};

class FixedAnswerModel final : public ModelClient {
public:
    explicit FixedAnswerModel(std::string text) : text_(std::move(text)) {}
    Completion complete(const std::string&, const LlmConfig&, int) override { return Completion{text_, {}, {}}; }

private:
    std::string text_;
};

/// Text an ideal model would give for `reference`.
std::string render_answer(const ReferenceAnswer& reference);

} // namespace tracekg
