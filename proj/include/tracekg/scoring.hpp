#pragma once

#include "tracekg/benchmark.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracekg {

struct ScoredResponse {
    std::string item_id;
    int sample_index = 0;
    double score = 0.0; ///< 0, 0.5 or 1
    std::string extracted;
    std::string raw_text;
    bool extraction_failed = false;
};

/// Format-directed extraction, then grading on the {0, 0.5, 1} rubric.
///
/// true/false: first standalone true/false token, case-insensitive.
/// multiple choice: first "(X)" naming an option, else first standalone
///   capital letter naming an option.
/// numeric: last number in the text once entity mentions (CPU_1, thread 42)
///   are blanked out; a number carrying a time unit wins over a bare one when
///   the reference is a duration. Units s/ms/us/ns are normalized to ns.
/// entity: first cpu/thread mention (or listed alias) decides; a correct
///   entity whose stated quantity misses rel_tol earns 0.5.
///
/// Never throws; unparseable text scores 0 with `extraction_failed` set.
ScoredResponse score_response(std::string_view raw_text, const BenchmarkItem& item, int sample_index = 0);
ScoredResponse score_response(std::string_view raw_text, const BenchmarkItem& item, const ReferenceAnswer& reference,
                              int sample_index = 0);

struct ExtractedNumber {
    double value = 0.0;
    std::string unit; ///< normalized: "ns", "us", "ms", "s" or ""
};

/// Every number in `text`, in order of appearance, with its unit if one follows.
std::vector<ExtractedNumber> extract_numbers(std::string_view text);

/// (0.5 * N_half + N_one) / N * 100. Throws Error(domain) when empty
/// or when a score is not a rubric value.
double accuracy(std::span<const double> scores);

/// Accuracy from label percentages (pct0 + pct05 + pct1 = 100).
double accuracy_from_percentages(double pct0, double pct05, double pct1) noexcept;

/// 100 * (1 - E / log2 3), E the entropy of the score distribution over
/// {0, 0.5, 1}. Throws Error(domain) when empty.
double consistency(std::span<const double> scores);

struct ScoreRow {
    std::string model;
    std::string interval;
    std::string format;
    std::string hop;
    std::string input; ///< "baseline" or "taaf"
    double pct0 = 0.0;
    double pct05 = 0.0;
    double pct1 = 0.0;
    double expected_acc = 0.0;
};

/// The 54 reference rows, each with its baseline and graph-grounded triple
/// (108 triples in all).
const std::vector<ScoreRow>& reference_rows();

/// CSV with header `model,interval,format,hop,input,pct0,pct05,pct1,expected_acc`.
std::vector<ScoreRow> load_reference_rows_csv(const std::filesystem::path& path);

struct FixtureMismatch {
    ScoreRow row;
    double computed = 0.0;
};

/// Rows whose recomputed accuracy differs from the printed one by more than `tol`.
std::vector<FixtureMismatch> check_reference_rows(const std::vector<ScoreRow>& rows, double tol);

} // namespace tracekg
