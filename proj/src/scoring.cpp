#include "tracekg/scoring.hpp"

#include "tracekg/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

namespace tracekg {

namespace {

const std::regex& mention_re()
{
    static const std::regex re(R"(\b(cpu|thread|tid)[ _:#-]*([0-9]+))", std::regex::icase);
    return re;
}

const std::regex& number_re()
{
    static const std::regex re(
        "(-?(?:[0-9]{1,3}(?:,[0-9]{3})+|[0-9]+)(?:\\.[0-9]+)?(?:[eE][-+]?[0-9]+)?)"
        "(?:\\s*(nanoseconds?|microseconds?|milliseconds?|seconds?|secs?|ns|us|\xC2\xB5s|\xCE\xBCs|ms|s)(?![A-Za-z]))?");
    return re;
}

std::string normalize_unit(std::string unit)
{
    if (unit.empty()) {
        return unit;
    }
    if (unit == "ns" || unit.rfind("nanosecond", 0) == 0) {
        return "ns";
    }
    if (unit == "us" || unit == "\xC2\xB5s" || unit == "\xCE\xBCs" || unit.rfind("microsecond", 0) == 0) {
        return "us";
    }
    if (unit == "ms" || unit.rfind("millisecond", 0) == 0) {
        return "ms";
    }
    return "s";
}

double unit_factor(std::string_view unit)
{
    if (unit == "s") {
        return 1e9;
    }
    if (unit == "ms") {
        return 1e6;
    }
    if (unit == "us") {
        return 1e3;
    }
    return 1.0;
}

std::string lower(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

struct Mention {
    std::size_t pos = 0;
    std::size_t len = 0;
    std::string id;
};

std::vector<Mention> entity_mentions(const std::string& text)
{
    std::vector<Mention> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), mention_re()); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const auto kind = lower(m[1].str());
        const auto type = kind == "cpu" ? "cpu" : "thread";
        out.push_back(Mention{static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.length(0)),
                              fmt::format("{}:{}", type, m[2].str())});
    }
    return out;
}

std::string blank_mentions(std::string text)
{
    for (const auto& m : entity_mentions(text)) {
        std::fill_n(text.begin() + static_cast<std::ptrdiff_t>(m.pos), m.len, ' ');
    }
    return text;
}

bool is_time_unit(std::string_view unit) { return !unit.empty(); }

/// The number a free-text answer commits to, per the rule in the header.
std::optional<ExtractedNumber> pick_number(const std::string& text, bool want_time)
{
    const auto numbers = extract_numbers(blank_mentions(text));
    if (numbers.empty()) {
        return std::nullopt;
    }
    if (want_time) {
        for (auto it = numbers.rbegin(); it != numbers.rend(); ++it) {
            if (is_time_unit(it->unit)) {
                return *it;
            }
        }
    }
    return numbers.back();
}

/// 1, 0.5 or 0 for `x` against a numeric reference.
double grade_number(const ExtractedNumber& x, const NumericReference& ref)
{
    double got = x.value;
    double want = ref.value;
    if (!ref.unit.empty()) {
        got *= unit_factor(x.unit.empty() ? ref.unit : x.unit);
        want *= unit_factor(ref.unit);
    }
    const double err = std::abs(got - want);
    const double scale = std::abs(want);
    if (scale == 0.0) {
        return err == 0.0 ? 1.0 : 0.0;
    }
    constexpr double slack = 1.0 + 1e-12;
    if (err <= ref.rel_tol * scale * slack) {
        return 1.0;
    }
    if (err <= ref.loose_tol * scale * slack) {
        return 0.5;
    }
    return 0.0;
}

std::string format_number(const ExtractedNumber& x)
{
    return x.unit.empty() ? fmt::format("{}", x.value) : fmt::format("{} {}", x.value, x.unit);
}

void score_boolean(ScoredResponse& out, const std::string& text, const BooleanReference& ref)
{
    static const std::regex re(R"(\b(true|false)\b)", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, re)) {
        out.extraction_failed = true;
        return;
    }
    out.extracted = lower(m[1].str());
    out.score = (out.extracted == "true") == ref.value ? 1.0 : 0.0;
}

void score_choice(ScoredResponse& out, const std::string& text, const ChoiceReference& ref)
{
    auto is_label = [&](const std::string& letter) {
        return std::any_of(ref.options.begin(), ref.options.end(),
                           [&](const ChoiceOption& o) { return o.label == letter; });
    };
    static const std::regex paren(R"(\(([A-F])\))");
    static const std::regex bare(R"((?:^|[^A-Za-z0-9_])([A-F])(?![A-Za-z0-9_]))");
    for (const auto* re : {&paren, &bare}) {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), *re); it != std::sregex_iterator(); ++it) {
            const auto letter = (*it)[1].str();
            if (is_label(letter)) {
                out.extracted = letter;
                out.score = letter == ref.letter ? 1.0 : 0.0;
                return;
            }
        }
    }
    out.extraction_failed = true;
}

void score_numeric(ScoredResponse& out, const std::string& text, const NumericReference& ref)
{
    const auto x = pick_number(text, !ref.unit.empty());
    if (!x) {
        out.extraction_failed = true;
        return;
    }
    out.extracted = format_number(*x);
    out.score = grade_number(*x, ref);
}

void score_entity(ScoredResponse& out, const std::string& text, const EntityReference& ref)
{
    std::vector<Mention> mentions = entity_mentions(text);
    const auto haystack = lower(text);
    auto add_phrase = [&](const std::string& phrase, const std::string& id) {
        const auto needle = lower(phrase);
        if (needle.empty()) {
            return;
        }
        for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
            const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
            const auto after = pos + needle.size();
            const bool right_ok =
                after >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[after]));
            if (left_ok && right_ok) {
                mentions.push_back(Mention{pos, needle.size(), id});
            }
        }
    };
    for (const auto& alias : ref.aliases) {
        add_phrase(alias, ref.canonical);
    }
    add_phrase("none", "none");
    if (mentions.empty()) {
        out.extraction_failed = true;
        return;
    }
    const auto first = std::min_element(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
        return a.pos != b.pos ? a.pos < b.pos : a.len > b.len;
    });
    out.extracted = first->id;
    if (first->id != ref.canonical) {
        out.score = 0.0;
        return;
    }
    out.score = 1.0;
    if (ref.quantity) {
        const auto x = pick_number(text, !ref.quantity->unit.empty());
        if (x) {
            out.extracted += " " + format_number(*x);
            if (grade_number(*x, *ref.quantity) < 1.0) {
                out.score = 0.5;
            }
        }
    }
}

} // namespace

std::vector<ExtractedNumber> extract_numbers(std::string_view text)
{
    const std::string s(text);
    std::vector<ExtractedNumber> out;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number_re()); it != std::sregex_iterator(); ++it) {
        std::string digits = (*it)[1].str();
        digits.erase(std::remove(digits.begin(), digits.end(), ','), digits.end());
        ExtractedNumber n;
        try {
            n.value = std::stod(digits);
        } catch (const std::exception&) {
            continue;
        }
        n.unit = normalize_unit((*it)[2].matched ? (*it)[2].str() : std::string{});
        out.push_back(std::move(n));
    }
    return out;
}

ScoredResponse score_response(std::string_view raw_text, const BenchmarkItem& item, int sample_index)
{
    return score_response(raw_text, item, item.reference, sample_index);
}

ScoredResponse score_response(std::string_view raw_text, const BenchmarkItem& item, const ReferenceAnswer& reference,
                              int sample_index)
{
    ScoredResponse out;
    out.item_id = item.id;
    out.sample_index = sample_index;
    out.raw_text = std::string(raw_text);
    const std::string& text = out.raw_text;
    std::visit(
        [&](const auto& ref) {
            using T = std::decay_t<decltype(ref)>;
            if constexpr (std::is_same_v<T, BooleanReference>) {
                score_boolean(out, text, ref);
            } else if constexpr (std::is_same_v<T, ChoiceReference>) {
                score_choice(out, text, ref);
            } else if constexpr (std::is_same_v<T, NumericReference>) {
                score_numeric(out, text, ref);
            } else {
                score_entity(out, text, ref);
            }
        },
        reference.answer);
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

std::array<std::size_t, 3> tally(std::span<const double> scores)
{
    if (scores.empty()) {
        throw Error(Errc::domain, "metric over an empty score list");
    }
    std::array<std::size_t, 3> counts{};
    for (double s : scores) {
        if (s == 0.0) {
            ++counts[0];
        } else if (s == 0.5) {
            ++counts[1];
        } else if (s == 1.0) {
            ++counts[2];
        } else {
            throw Error(Errc::domain, fmt::format("{} is not a rubric score", s));
        }
    }
    return counts;
}

} // namespace

double accuracy(std::span<const double> scores)
{
    const auto c = tally(scores);
    return (0.5 * static_cast<double>(c[1]) + static_cast<double>(c[2])) / static_cast<double>(scores.size()) *
           100.0;
}

double accuracy_from_percentages(double /*pct0*/, double pct05, double pct1) noexcept
{
    return 0.5 * pct05 + pct1;
}

double consistency(std::span<const double> scores)
{
    const auto c = tally(scores);
    const auto n = static_cast<double>(scores.size());
    double entropy = 0.0;
    for (auto count : c) {
        if (count == 0) {
            continue;
        }
        const double p = static_cast<double>(count) / n;
        entropy -= p * std::log2(p);
    }
    double value = (1.0 - entropy / std::log2(3.0)) * 100.0;
    // Rounding residue at the two extremes.
    if (std::abs(value) < 1e-9) {
        value = 0.0;
    }
    if (std::abs(value - 100.0) < 1e-9) {
        value = 100.0;
    }
    return value;
}

// ---------------------------------------------------------------------------
// Reference score rows

const std::vector<ScoreRow>& reference_rows()
{
    static const std::vector<ScoreRow> rows = {
        {"gpt-4.1-nano", "1s", "explanatory", "single", "baseline", 45.00, 13.33, 41.67, 48.33},
        {"gpt-4.1-nano", "1s", "explanatory", "single", "taaf", 33.33, 8.33, 58.33, 62.50},
        {"gpt-4.1-nano", "1s", "explanatory", "multi", "baseline", 61.67, 20.00, 18.33, 28.33},
        {"gpt-4.1-nano", "1s", "explanatory", "multi", "taaf", 46.67, 20.00, 33.33, 43.33},
        {"gpt-4.1-nano", "1s", "multiple_choice", "single", "baseline", 35.56, 17.78, 46.67, 55.56},
        {"gpt-4.1-nano", "1s", "multiple_choice", "single", "taaf", 11.11, 5.56, 83.33, 86.11},
        {"gpt-4.1-nano", "1s", "multiple_choice", "multi", "baseline", 40.00, 11.11, 48.89, 54.44},
        {"gpt-4.1-nano", "1s", "multiple_choice", "multi", "taaf", 26.67, 4.44, 68.89, 71.11},
        {"gpt-4.1-nano", "1s", "true_false", "single", "baseline", 20.00, 8.89, 71.11, 75.56},
        {"gpt-4.1-nano", "1s", "true_false", "single", "taaf", 10.00, 2.22, 87.78, 88.89},
        {"gpt-4.1-nano", "1s", "true_false", "multi", "baseline", 41.11, 21.11, 37.78, 48.33},
        {"gpt-4.1-nano", "1s", "true_false", "multi", "taaf", 16.67, 12.22, 71.11, 77.22},
        {"gpt-4.1-nano", "10s", "explanatory", "single", "baseline", 46.67, 16.67, 36.67, 45.00},
        {"gpt-4.1-nano", "10s", "explanatory", "single", "taaf", 43.33, 5.00, 51.67, 54.17},
        {"gpt-4.1-nano", "10s", "explanatory", "multi", "baseline", 56.67, 21.67, 21.67, 32.50},
        {"gpt-4.1-nano", "10s", "explanatory", "multi", "taaf", 46.67, 13.33, 40.00, 46.67},
        {"gpt-4.1-nano", "10s", "multiple_choice", "single", "baseline", 50.00, 13.33, 36.67, 43.33},
        {"gpt-4.1-nano", "10s", "multiple_choice", "single", "taaf", 29.17, 5.83, 65.00, 67.92},
        {"gpt-4.1-nano", "10s", "multiple_choice", "multi", "baseline", 55.67, 13.00, 31.33, 37.83},
        {"gpt-4.1-nano", "10s", "multiple_choice", "multi", "taaf", 37.14, 4.29, 58.57, 60.71},
        {"gpt-4.1-nano", "10s", "true_false", "single", "baseline", 27.78, 9.44, 62.78, 67.50},
        {"gpt-4.1-nano", "10s", "true_false", "single", "taaf", 11.11, 4.44, 84.44, 86.67},
        {"gpt-4.1-nano", "10s", "true_false", "multi", "baseline", 55.56, 16.67, 27.78, 36.11},
        {"gpt-4.1-nano", "10s", "true_false", "multi", "taaf", 29.17, 9.17, 61.67, 66.25},
        {"gpt-4.1-nano", "100s", "explanatory", "single", "baseline", 49.03, 15.97, 34.99, 42.98},
        {"gpt-4.1-nano", "100s", "explanatory", "single", "taaf", 45.10, 7.84, 47.06, 50.00},
        {"gpt-4.1-nano", "100s", "explanatory", "multi", "baseline", 59.15, 21.13, 19.72, 30.29},
        {"gpt-4.1-nano", "100s", "explanatory", "multi", "taaf", 49.30, 19.72, 30.99, 40.85},
        {"gpt-4.1-nano", "100s", "multiple_choice", "single", "baseline", 43.40, 19.81, 36.79, 46.70},
        {"gpt-4.1-nano", "100s", "multiple_choice", "single", "taaf", 26.61, 6.42, 66.97, 70.18},
        {"gpt-4.1-nano", "100s", "multiple_choice", "multi", "baseline", 48.50, 13.50, 38.00, 44.75},
        {"gpt-4.1-nano", "100s", "multiple_choice", "multi", "taaf", 33.58, 6.72, 59.70, 62.06},
        {"gpt-4.1-nano", "100s", "true_false", "single", "baseline", 35.63, 14.38, 50.00, 57.19},
        {"gpt-4.1-nano", "100s", "true_false", "single", "taaf", 14.13, 6.38, 79.50, 82.69},
        {"gpt-4.1-nano", "100s", "true_false", "multi", "baseline", 55.10, 17.65, 27.25, 36.07},
        {"gpt-4.1-nano", "100s", "true_false", "multi", "taaf", 26.13, 10.92, 62.95, 67.41},
        {"gpt-4o", "1s", "explanatory", "single", "baseline", 30.00, 8.00, 62.00, 66.00},
        {"gpt-4o", "1s", "explanatory", "single", "taaf", 18.00, 2.67, 79.33, 80.67},
        {"gpt-4o", "1s", "explanatory", "multi", "baseline", 46.00, 12.00, 42.00, 48.00},
        {"gpt-4o", "1s", "explanatory", "multi", "taaf", 29.33, 9.33, 61.33, 66.00},
        {"gpt-4o", "1s", "multiple_choice", "single", "baseline", 26.00, 6.00, 68.00, 71.00},
        {"gpt-4o", "1s", "multiple_choice", "single", "taaf", 7.00, 1.33, 91.67, 92.33},
        {"gpt-4o", "1s", "multiple_choice", "multi", "baseline", 33.33, 8.33, 58.33, 62.50},
        {"gpt-4o", "1s", "multiple_choice", "multi", "taaf", 13.33, 3.33, 83.33, 85.00},
        {"gpt-4o", "1s", "true_false", "single", "baseline", 13.33, 5.00, 81.67, 84.17},
        {"gpt-4o", "1s", "true_false", "single", "taaf", 4.00, 0.67, 95.33, 95.67},
        {"gpt-4o", "1s", "true_false", "multi", "baseline", 32.00, 14.67, 53.33, 60.67},
        {"gpt-4o", "1s", "true_false", "multi", "taaf", 12.67, 3.33, 84.00, 85.67},
        {"gpt-4o", "10s", "explanatory", "single", "baseline", 34.48, 11.49, 54.02, 59.76},
        {"gpt-4o", "10s", "explanatory", "single", "taaf", 33.33, 3.45, 63.22, 64.94},
        {"gpt-4o", "10s", "explanatory", "multi", "baseline", 50.00, 12.50, 37.50, 43.75},
        {"gpt-4o", "10s", "explanatory", "multi", "taaf", 38.46, 11.54, 50.00, 55.77},
        {"gpt-4o", "10s", "multiple_choice", "single", "baseline", 34.55, 12.73, 52.73, 58.09},
        {"gpt-4o", "10s", "multiple_choice", "single", "taaf", 13.64, 2.73, 83.64, 85.00},
        {"gpt-4o", "10s", "multiple_choice", "multi", "baseline", 46.43, 11.90, 41.67, 47.62},
        {"gpt-4o", "10s", "multiple_choice", "multi", "taaf", 22.32, 3.57, 74.11, 75.89},
        {"gpt-4o", "10s", "true_false", "single", "baseline", 18.27, 6.73, 75.00, 78.37},
        {"gpt-4o", "10s", "true_false", "single", "taaf", 6.25, 2.50, 91.25, 92.50},
        {"gpt-4o", "10s", "true_false", "multi", "baseline", 41.67, 16.67, 41.67, 50.00},
        {"gpt-4o", "10s", "true_false", "multi", "taaf", 17.44, 10.47, 72.09, 76.32},
        {"gpt-4o", "100s", "explanatory", "single", "baseline", 39.39, 12.12, 48.48, 54.55},
        {"gpt-4o", "100s", "explanatory", "single", "taaf", 29.54, 8.41, 62.05, 66.26},
        {"gpt-4o", "100s", "explanatory", "multi", "baseline", 55.17, 15.52, 29.31, 36.07},
        {"gpt-4o", "100s", "explanatory", "multi", "taaf", 35.79, 14.74, 49.47, 56.84},
        {"gpt-4o", "100s", "multiple_choice", "single", "baseline", 39.22, 14.71, 46.08, 53.44},
        {"gpt-4o", "100s", "multiple_choice", "single", "taaf", 11.76, 3.92, 84.31, 86.27},
        {"gpt-4o", "100s", "multiple_choice", "multi", "baseline", 50.88, 14.04, 35.09, 42.11},
        {"gpt-4o", "100s", "multiple_choice", "multi", "taaf", 23.81, 5.95, 70.24, 72.22},
        {"gpt-4o", "100s", "true_false", "single", "baseline", 26.92, 9.62, 63.46, 68.27},
        {"gpt-4o", "100s", "true_false", "single", "taaf", 7.21, 2.88, 89.90, 91.35},
        {"gpt-4o", "100s", "true_false", "multi", "baseline", 47.83, 17.39, 34.78, 43.48},
        {"gpt-4o", "100s", "true_false", "multi", "taaf", 15.85, 6.71, 77.44, 80.80},
        {"o4-mini", "1s", "explanatory", "single", "baseline", 17.78, 15.56, 66.67, 74.44},
        {"o4-mini", "1s", "explanatory", "single", "taaf", 4.44, 5.00, 90.56, 93.06},
        {"o4-mini", "1s", "explanatory", "multi", "baseline", 35.24, 22.86, 41.90, 53.33},
        {"o4-mini", "1s", "explanatory", "multi", "taaf", 8.57, 14.29, 77.14, 84.29},
        {"o4-mini", "1s", "multiple_choice", "single", "baseline", 17.02, 8.51, 74.47, 78.72},
        {"o4-mini", "1s", "multiple_choice", "single", "taaf", 3.19, 1.06, 95.74, 96.27},
        {"o4-mini", "1s", "multiple_choice", "multi", "baseline", 21.21, 14.14, 64.65, 71.72},
        {"o4-mini", "1s", "multiple_choice", "multi", "taaf", 5.41, 2.70, 91.89, 93.24},
        {"o4-mini", "1s", "true_false", "single", "baseline", 8.33, 7.22, 84.44, 88.06},
        {"o4-mini", "1s", "true_false", "single", "taaf", 2.22, 1.11, 96.67, 97.22},
        {"o4-mini", "1s", "true_false", "multi", "baseline", 21.75, 13.75, 64.50, 71.88},
        {"o4-mini", "1s", "true_false", "multi", "taaf", 4.37, 2.46, 93.17, 94.35},
        {"o4-mini", "10s", "explanatory", "single", "baseline", 9.52, 13.10, 77.38, 83.93},
        {"o4-mini", "10s", "explanatory", "single", "taaf", 5.95, 5.95, 88.10, 91.07},
        {"o4-mini", "10s", "explanatory", "multi", "baseline", 27.40, 19.86, 52.74, 62.67},
        {"o4-mini", "10s", "explanatory", "multi", "taaf", 9.59, 13.70, 76.71, 83.56},
        {"o4-mini", "10s", "multiple_choice", "single", "baseline", 13.68, 10.26, 76.06, 81.19},
        {"o4-mini", "10s", "multiple_choice", "single", "taaf", 3.08, 3.08, 93.85, 95.38},
        {"o4-mini", "10s", "multiple_choice", "multi", "baseline", 18.10, 11.43, 70.48, 76.19},
        {"o4-mini", "10s", "multiple_choice", "multi", "taaf", 5.24, 2.86, 91.90, 93.33},
        {"o4-mini", "10s", "true_false", "single", "baseline", 3.33, 5.00, 91.67, 94.17},
        {"o4-mini", "10s", "true_false", "single", "taaf", 0.56, 0.56, 98.89, 99.17},
        {"o4-mini", "10s", "true_false", "multi", "baseline", 14.29, 12.14, 73.57, 79.64},
        {"o4-mini", "10s", "true_false", "multi", "taaf", 1.78, 3.56, 94.67, 96.44},
        {"o4-mini", "100s", "explanatory", "single", "baseline", 12.50, 12.50, 75.00, 81.25},
        {"o4-mini", "100s", "explanatory", "single", "taaf", 6.15, 6.15, 87.69, 90.76},
        {"o4-mini", "100s", "explanatory", "multi", "baseline", 25.64, 17.95, 56.41, 65.38},
        {"o4-mini", "100s", "explanatory", "multi", "taaf", 7.69, 12.82, 79.49, 85.90},
        {"o4-mini", "100s", "multiple_choice", "single", "baseline", 17.39, 11.59, 71.01, 76.81},
        {"o4-mini", "100s", "multiple_choice", "single", "taaf", 4.96, 2.48, 92.56, 94.05},
        {"o4-mini", "100s", "multiple_choice", "multi", "baseline", 22.22, 11.11, 66.67, 72.22},
        {"o4-mini", "100s", "multiple_choice", "multi", "taaf", 5.88, 2.94, 91.18, 92.65},
        {"o4-mini", "100s", "true_false", "single", "baseline", 6.58, 7.89, 85.53, 89.47},
        {"o4-mini", "100s", "true_false", "single", "taaf", 1.54, 1.92, 96.54, 97.50},
        {"o4-mini", "100s", "true_false", "multi", "baseline", 18.25, 13.14, 68.61, 75.18},
        {"o4-mini", "100s", "true_false", "multi", "taaf", 2.55, 3.63, 93.83, 95.64},
    };
    return rows;
}

std::vector<ScoreRow> load_reference_rows_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io, fmt::format("cannot open fixture '{}'", path.string()));
    }
    std::string line;
    std::getline(in, line);
    if (line != "model,interval,format,hop,input,pct0,pct05,pct1,expected_acc") {
        throw Error(Errc::format, fmt::format("{}: unexpected header", path.string()));
    }
    std::vector<ScoreRow> rows;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 9) {
            throw Error(Errc::format, fmt::format("{}:{}: expected 9 fields", path.string(), line_number));
        }
        try {
            rows.push_back(ScoreRow{cells[0], cells[1], cells[2], cells[3], cells[4], std::stod(cells[5]),
                                     std::stod(cells[6]), std::stod(cells[7]), std::stod(cells[8])});
        } catch (const std::exception&) {
            throw Error(Errc::format, fmt::format("{}:{}: bad number", path.string(), line_number));
        }
    }
    return rows;
}

std::vector<FixtureMismatch> check_reference_rows(const std::vector<ScoreRow>& rows, double tol)
{
    std::vector<FixtureMismatch> out;
    for (const auto& row : rows) {
        const double computed = accuracy_from_percentages(row.pct0, row.pct05, row.pct1);
        if (std::abs(computed - row.expected_acc) > tol) {
            out.push_back(FixtureMismatch{row, computed});
        }
    }
    return out;
}

} // namespace tracekg
