#include "tracekg/benchmark.hpp"

#include "tracekg/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

namespace tracekg {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(AnswerFormat f) noexcept
{
    switch (f) {
    case AnswerFormat::explanatory: return "explanatory";
    case AnswerFormat::multiple_choice: return "multiple_choice";
    case AnswerFormat::true_false: return "true_false";
    }
    return "explanatory";
}

std::string_view to_string(HopScope h) noexcept
{
    return h == HopScope::single ? "single" : "multi";
}

AnswerFormat parse_answer_format(std::string_view text)
{
    for (auto f : {AnswerFormat::explanatory, AnswerFormat::multiple_choice, AnswerFormat::true_false}) {
        if (to_string(f) == text) {
            return f;
        }
    }
    throw Error(Errc::parse, fmt::format("unknown answer format '{}'", text));
}

HopScope parse_hop_scope(std::string_view text)
{
    if (text == "single") {
        return HopScope::single;
    }
    if (text == "multi") {
        return HopScope::multi;
    }
    throw Error(Errc::parse, fmt::format("unknown hop scope '{}'", text));
}

namespace {

constexpr QueryOp kAllOps[] = {QueryOp::cpu_time,         QueryOp::busy_time,       QueryOp::distinct_threads,
                               QueryOp::top_thread,       QueryOp::busiest_cpu,     QueryOp::most_distinct_cpu,
                               QueryOp::primary_cpu,      QueryOp::busy_time_exceeds, QueryOp::busiest_is_most_distinct};

enum class ResultKind { quantity, entity, boolean };

ResultKind result_kind(QueryOp op)
{
    switch (op) {
    case QueryOp::cpu_time:
    case QueryOp::busy_time:
    case QueryOp::distinct_threads: return ResultKind::quantity;
    case QueryOp::top_thread:
    case QueryOp::busiest_cpu:
    case QueryOp::most_distinct_cpu:
    case QueryOp::primary_cpu: return ResultKind::entity;
    case QueryOp::busy_time_exceeds:
    case QueryOp::busiest_is_most_distinct: return ResultKind::boolean;
    }
    return ResultKind::boolean;
}

bool needs_tid(QueryOp op) { return op == QueryOp::cpu_time || op == QueryOp::primary_cpu; }

bool needs_cpu(QueryOp op)
{
    return op == QueryOp::cpu_time || op == QueryOp::busy_time || op == QueryOp::distinct_threads ||
           op == QueryOp::top_thread || op == QueryOp::busy_time_exceeds;
}

bool needs_threshold(QueryOp op) { return op == QueryOp::busy_time_exceeds; }

} // namespace

std::string_view to_string(QueryOp op) noexcept
{
    switch (op) {
    case QueryOp::cpu_time: return "cpu_time";
    case QueryOp::busy_time: return "busy_time";
    case QueryOp::distinct_threads: return "distinct_threads";
    case QueryOp::top_thread: return "top_thread";
    case QueryOp::busiest_cpu: return "busiest_cpu";
    case QueryOp::most_distinct_cpu: return "most_distinct_cpu";
    case QueryOp::primary_cpu: return "primary_cpu";
    case QueryOp::busy_time_exceeds: return "busy_time_exceeds";
    case QueryOp::busiest_is_most_distinct: return "busiest_is_most_distinct";
    }
    return "busiest_cpu";
}

QueryOp parse_query_op(std::string_view text)
{
    for (auto op : kAllOps) {
        if (to_string(op) == text) {
            return op;
        }
    }
    throw Error(Errc::parse, fmt::format("unknown query op '{}'", text));
}

// ---------------------------------------------------------------------------
// Evaluation

QueryResult evaluate(const OracleQuery& query, const Analytics& analytics, Window w)
{
    switch (query.op) {
    case QueryOp::cpu_time:
        return Quantity{analytics.cpu_time_of_thread_on_cpu(*query.tid, *query.cpu, w), "ns"};
    case QueryOp::busy_time: return Quantity{analytics.busy_time_of_cpu(*query.cpu, w), "ns"};
    case QueryOp::distinct_threads: return Quantity{analytics.distinct_threads_on_cpu(*query.cpu, w), ""};
    case QueryOp::top_thread: {
        const auto top = analytics.top_thread_on_cpu(*query.cpu, w);
        if (!top) {
            return EntityAnswer{"none", std::nullopt};
        }
        return EntityAnswer{thread_node_id(top->tid), Quantity{top->runtime, "ns"}};
    }
    case QueryOp::busiest_cpu: {
        const auto busiest = analytics.busiest_cpu(w);
        return EntityAnswer{cpu_node_id(busiest.cpu), Quantity{busiest.busy, "ns"}};
    }
    case QueryOp::most_distinct_cpu:
        return EntityAnswer{cpu_node_id(analytics.cpu_serving_most_distinct_threads(w)), std::nullopt};
    case QueryOp::primary_cpu: {
        const auto cpu = analytics.primary_cpu_of_thread(*query.tid, w);
        return EntityAnswer{cpu ? cpu_node_id(*cpu) : "none", std::nullopt};
    }
    case QueryOp::busy_time_exceeds: return analytics.busy_time_of_cpu(*query.cpu, w) > *query.threshold_ns;
    case QueryOp::busiest_is_most_distinct:
        return analytics.busiest_cpu(w).cpu == analytics.cpu_serving_most_distinct_threads(w);
    }
    throw Error(Errc::validation, "unhandled query op");
}

namespace {

std::optional<std::pair<std::string_view, std::int64_t>> split_entity_id(std::string_view id)
{
    const auto colon = id.find(':');
    if (colon == std::string_view::npos) {
        return std::nullopt;
    }
    std::int64_t number = 0;
    const auto digits = id.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
        return std::nullopt;
    }
    return std::pair{id.substr(0, colon), number};
}

Duration lookup(const std::map<CpuId, Duration>& m, CpuId cpu)
{
    const auto it = m.find(cpu);
    return it == m.end() ? 0 : it->second;
}

} // namespace

WindowFacts facts_from_graph(const KnowledgeGraph& graph)
{
    WindowFacts facts;
    for (const auto& node : graph.nodes) {
        if (node.type != NodeType::cpu) {
            continue;
        }
        const auto parts = split_entity_id(node.id);
        if (!parts) {
            throw Error(Errc::format, fmt::format("bad cpu node id '{}'", node.id));
        }
        const auto cpu = static_cast<CpuId>(parts->second);
        facts.cpus.insert(cpu);
        facts.busy[cpu] = node.feature(kFeatureBusyTime).value_or(0);
        facts.distinct[cpu] = node.feature(kFeatureDistinctThreads).value_or(0);
    }
    for (const auto& edge : graph.edges) {
        const auto src = split_entity_id(edge.src);
        const auto dst = split_entity_id(edge.dst);
        if (!src || !dst) {
            throw Error(Errc::format, fmt::format("bad edge '{}' -> '{}'", edge.src, edge.dst));
        }
        facts.runtime[{static_cast<CpuId>(dst->second), src->second}] += edge.weight_ns;
    }
    return facts;
}

WindowFacts facts_from_baseline(std::string_view baseline_text)
{
    WindowFacts facts;
    std::map<CpuId, std::set<Tid>> seen;
    std::istringstream in{std::string(baseline_text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto pos = line.find("cpus ");
            if (pos == std::string::npos) {
                continue;
            }
            std::istringstream list(line.substr(pos + 5));
            std::string item;
            while (std::getline(list, item, ',')) {
                if (!item.empty()) {
                    const auto cpu = static_cast<CpuId>(std::stoul(item));
                    facts.cpus.insert(cpu);
                    facts.busy[cpu] += 0;
                    facts.distinct[cpu] += 0;
                }
            }
            continue;
        }
        std::istringstream fields(line);
        std::string path;
        Timestamp start = 0;
        Timestamp end = 0;
        std::string value;
        if (!(fields >> path >> start >> end >> value)) {
            continue;
        }
        const auto attr = AttributePath::parse(path);
        const auto& seg = attr.segments();
        if (seg.size() != 3 || seg[0] != "CPUs" || seg[2] != "Current_thread") {
            continue;
        }
        const auto cpu = static_cast<CpuId>(std::stoul(seg[1]));
        const Tid tid = std::stoll(value);
        if (tid == kIdleTid) {
            continue;
        }
        facts.runtime[{cpu, tid}] += end - start;
        facts.busy[cpu] += end - start;
        seen[cpu].insert(tid);
    }
    for (const auto& [cpu, tids] : seen) {
        facts.distinct[cpu] = tids.size();
    }
    return facts;
}

QueryResult evaluate(const OracleQuery& query, const WindowFacts& facts)
{
    auto runtime_of = [&](CpuId cpu, Tid tid) {
        const auto it = facts.runtime.find({cpu, tid});
        return it == facts.runtime.end() ? Duration{0} : it->second;
    };
    auto busiest = [&] {
        CpuId best = facts.cpus.empty() ? 0 : *facts.cpus.begin();
        Duration best_busy = lookup(facts.busy, best);
        for (CpuId cpu : facts.cpus) {
            if (lookup(facts.busy, cpu) > best_busy) {
                best = cpu;
                best_busy = lookup(facts.busy, cpu);
            }
        }
        return std::pair{best, best_busy};
    };
    auto most_distinct = [&] {
        CpuId best = facts.cpus.empty() ? 0 : *facts.cpus.begin();
        std::uint64_t best_count = 0;
        for (CpuId cpu : facts.cpus) {
            const auto it = facts.distinct.find(cpu);
            const auto count = it == facts.distinct.end() ? 0 : it->second;
            if (count > best_count) {
                best = cpu;
                best_count = count;
            }
        }
        return best;
    };

    switch (query.op) {
    case QueryOp::cpu_time: return Quantity{runtime_of(*query.cpu, *query.tid), "ns"};
    case QueryOp::busy_time: return Quantity{lookup(facts.busy, *query.cpu), "ns"};
    case QueryOp::distinct_threads: {
        const auto it = facts.distinct.find(*query.cpu);
        return Quantity{it == facts.distinct.end() ? 0 : it->second, ""};
    }
    case QueryOp::top_thread: {
        std::optional<std::pair<Tid, Duration>> best;
        for (const auto& [key, runtime] : facts.runtime) {
            if (key.first == *query.cpu && runtime > 0 && (!best || runtime > best->second)) {
                best = std::pair{key.second, runtime};
            }
        }
        if (!best) {
            return EntityAnswer{"none", std::nullopt};
        }
        return EntityAnswer{thread_node_id(best->first), Quantity{best->second, "ns"}};
    }
    case QueryOp::busiest_cpu: {
        const auto [cpu, busy] = busiest();
        return EntityAnswer{cpu_node_id(cpu), Quantity{busy, "ns"}};
    }
    case QueryOp::most_distinct_cpu: return EntityAnswer{cpu_node_id(most_distinct()), std::nullopt};
    case QueryOp::primary_cpu: {
        std::optional<CpuId> best;
        Duration best_runtime = 0;
        for (const auto& [key, runtime] : facts.runtime) {
            if (key.second == *query.tid && runtime > best_runtime) {
                best = key.first;
                best_runtime = runtime;
            }
        }
        return EntityAnswer{best ? cpu_node_id(*best) : "none", std::nullopt};
    }
    case QueryOp::busy_time_exceeds: return lookup(facts.busy, *query.cpu) > *query.threshold_ns;
    case QueryOp::busiest_is_most_distinct: return busiest().first == most_distinct();
    }
    throw Error(Errc::validation, "unhandled query op");
}

// ---------------------------------------------------------------------------
// Entities

std::string display_name(std::string_view entity_id)
{
    const auto parts = split_entity_id(entity_id);
    if (!parts) {
        return std::string(entity_id);
    }
    if (parts->first == "cpu") {
        return fmt::format("CPU_{}", parts->second);
    }
    return fmt::format("thread {}", parts->second);
}

std::vector<std::string> default_aliases(std::string_view entity_id)
{
    if (entity_id == "none") {
        return {"none", "no thread"};
    }
    const auto parts = split_entity_id(entity_id);
    if (!parts) {
        return {std::string(entity_id)};
    }
    const auto n = parts->second;
    if (parts->first == "cpu") {
        return {fmt::format("CPU_{}", n), fmt::format("CPU {}", n), fmt::format("cpu:{}", n)};
    }
    return {fmt::format("thread {}", n), fmt::format("tid {}", n), fmt::format("thread:{}", n)};
}

std::optional<std::string> choice_letter_for(const std::vector<ChoiceOption>& options, std::string_view entity_id)
{
    for (const auto& option : options) {
        if (option.value == entity_id) {
            return option.label;
        }
    }
    for (const auto& option : options) {
        if (option.value == "none") {
            return option.label;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Benchmark file

namespace {

[[noreturn]] void schema_error(const std::string& path, std::string_view what)
{
    throw Error(Errc::item_schema, fmt::format("{}: {}", path, what));
}

void expect_keys(const ordered_json& obj, const std::string& path, std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional)
{
    if (!obj.is_object()) {
        schema_error(path, "must be an object");
    }
    for (auto key : required) {
        if (!obj.contains(key)) {
            schema_error(fmt::format("{}.{}", path, key), "is required");
        }
    }
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                           std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known) {
            schema_error(fmt::format("{}.{}", path, key), "unknown key");
        }
    }
}

const std::string& get_string(const ordered_json& obj, std::string_view key, const std::string& path)
{
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        schema_error(fmt::format("{}.{}", path, key), "must be a string");
    }
    return v.get_ref<const std::string&>();
}

std::uint64_t get_u64(const ordered_json& v, const std::string& path)
{
    if (!v.is_number_unsigned()) {
        schema_error(path, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::int64_t get_i64(const ordered_json& v, const std::string& path)
{
    if (!v.is_number_integer()) {
        schema_error(path, "must be an integer");
    }
    return v.get<std::int64_t>();
}

double get_number(const ordered_json& v, const std::string& path)
{
    if (!v.is_number()) {
        schema_error(path, "must be a number");
    }
    return v.get<double>();
}

template <typename F>
auto wrap_parse(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == Errc::item_schema) {
            throw;
        }
        schema_error(path, e.what());
    }
}

bool valid_unit(std::string_view unit)
{
    return unit.empty() || unit == "ns" || unit == "us" || unit == "ms" || unit == "s";
}

OracleQuery parse_query(const ordered_json& j, const std::string& path)
{
    expect_keys(j, path, {"op"}, {"tid", "cpu", "threshold_ns"});
    OracleQuery q;
    q.op = wrap_parse(path + ".op", [&] { return parse_query_op(get_string(j, "op", path)); });
    if (j.contains("tid")) {
        q.tid = get_i64(j["tid"], path + ".tid");
    }
    if (j.contains("cpu")) {
        q.cpu = static_cast<CpuId>(get_u64(j["cpu"], path + ".cpu"));
    }
    if (j.contains("threshold_ns")) {
        q.threshold_ns = get_u64(j["threshold_ns"], path + ".threshold_ns");
    }
    if (needs_tid(q.op) != q.tid.has_value()) {
        schema_error(path + ".tid", needs_tid(q.op) ? "is required for this op" : "is not used by this op");
    }
    if (needs_cpu(q.op) != q.cpu.has_value()) {
        schema_error(path + ".cpu", needs_cpu(q.op) ? "is required for this op" : "is not used by this op");
    }
    if (needs_threshold(q.op) != q.threshold_ns.has_value()) {
        schema_error(path + ".threshold_ns",
                     needs_threshold(q.op) ? "is required for this op" : "is not used by this op");
    }
    return q;
}

NumericReference parse_numeric(const ordered_json& j, const std::string& path)
{
    NumericReference n;
    n.value = get_number(j.at("value"), path + ".value");
    n.unit = get_string(j, "unit", path);
    if (!valid_unit(n.unit)) {
        schema_error(path + ".unit", "must be one of ns, us, ms, s or empty");
    }
    if (j.contains("rel_tol")) {
        n.rel_tol = get_number(j["rel_tol"], path + ".rel_tol");
    }
    if (j.contains("loose_tol")) {
        n.loose_tol = get_number(j["loose_tol"], path + ".loose_tol");
    }
    if (!(n.rel_tol > 0.0 && n.rel_tol <= n.loose_tol)) {
        schema_error(path + ".rel_tol", "tolerances must satisfy 0 < rel_tol <= loose_tol");
    }
    return n;
}

ReferenceAnswer parse_reference(const ordered_json& j, const std::string& path, AnswerFormat format)
{
    if (!j.is_object() || !j.contains("kind")) {
        schema_error(path + ".kind", "is required");
    }
    const std::string kind = get_string(j, "kind", path);
    ReferenceAnswer ref;
    if (kind == "numeric") {
        expect_keys(j, path, {"kind", "value", "unit"}, {"rel_tol", "loose_tol", "query"});
        ref.answer = parse_numeric(j, path);
    } else if (kind == "choice") {
        expect_keys(j, path, {"kind", "letter", "options"}, {"query"});
        ChoiceReference c;
        c.letter = get_string(j, "letter", path);
        const auto& options = j["options"];
        if (!options.is_array()) {
            schema_error(path + ".options", "must be an array");
        }
        if (options.size() < 2 || options.size() > 6) {
            schema_error(path + ".options", "must hold 2 to 6 options");
        }
        std::set<std::string> labels;
        for (std::size_t i = 0; i < options.size(); ++i) {
            const auto opath = fmt::format("{}.options[{}]", path, i);
            expect_keys(options[i], opath, {"label", "text", "value"}, {});
            ChoiceOption option{get_string(options[i], "label", opath), get_string(options[i], "text", opath),
                                get_string(options[i], "value", opath)};
            if (option.label.size() != 1 || option.label[0] < 'A' || option.label[0] > 'F') {
                schema_error(opath + ".label", "must be a single letter A-F");
            }
            if (!labels.insert(option.label).second) {
                schema_error(opath + ".label", "duplicate label");
            }
            c.options.push_back(std::move(option));
        }
        if (!labels.contains(c.letter)) {
            schema_error(path + ".letter", "must name one of the options");
        }
        ref.answer = std::move(c);
    } else if (kind == "boolean") {
        expect_keys(j, path, {"kind", "value"}, {"query"});
        if (!j["value"].is_boolean()) {
            schema_error(path + ".value", "must be a boolean");
        }
        ref.answer = BooleanReference{j["value"].get<bool>()};
    } else if (kind == "entity") {
        expect_keys(j, path, {"kind", "canonical"}, {"aliases", "quantity", "query"});
        EntityReference e;
        e.canonical = get_string(j, "canonical", path);
        if (e.canonical != "none" && !split_entity_id(e.canonical)) {
            schema_error(path + ".canonical", "must be cpu:<n>, thread:<tid> or none");
        }
        if (j.contains("aliases")) {
            if (!j["aliases"].is_array()) {
                schema_error(path + ".aliases", "must be an array");
            }
            for (std::size_t i = 0; i < j["aliases"].size(); ++i) {
                if (!j["aliases"][i].is_string()) {
                    schema_error(fmt::format("{}.aliases[{}]", path, i), "must be a string");
                }
                e.aliases.push_back(j["aliases"][i].get<std::string>());
            }
        }
        if (j.contains("quantity")) {
            expect_keys(j["quantity"], path + ".quantity", {"value", "unit"}, {"rel_tol", "loose_tol"});
            e.quantity = parse_numeric(j["quantity"], path + ".quantity");
        }
        ref.answer = std::move(e);
    } else {
        schema_error(path + ".kind", fmt::format("unknown reference kind '{}'", kind));
    }

    const bool kind_ok = (format == AnswerFormat::explanatory && (kind == "numeric" || kind == "entity")) ||
                         (format == AnswerFormat::multiple_choice && kind == "choice") ||
                         (format == AnswerFormat::true_false && kind == "boolean");
    if (!kind_ok) {
        schema_error(path + ".kind", fmt::format("'{}' does not match answer format '{}'", kind, to_string(format)));
    }

    if (j.contains("query")) {
        ref.query = parse_query(j["query"], path + ".query");
        const auto rk = result_kind(ref.query->op);
        const bool fits = (rk == ResultKind::quantity && kind == "numeric") ||
                          (rk == ResultKind::entity && (kind == "choice" || kind == "entity")) ||
                          (rk == ResultKind::boolean && kind == "boolean");
        if (!fits) {
            schema_error(path + ".query.op", fmt::format("result of '{}' cannot fill a '{}' reference",
                                                         to_string(ref.query->op), kind));
        }
    }
    return ref;
}

BenchmarkItem parse_item(const ordered_json& j, const std::string& path)
{
    expect_keys(j, path, {"id", "prompt", "answer_format", "hop_scope", "temporal_loc", "window_ns", "reference"},
                {"entities"});
    BenchmarkItem item;
    item.id = get_string(j, "id", path);
    if (item.id.empty()) {
        schema_error(path + ".id", "must not be empty");
    }
    item.prompt = get_string(j, "prompt", path);
    if (item.prompt.empty()) {
        schema_error(path + ".prompt", "must not be empty");
    }
    item.answer_format =
        wrap_parse(path + ".answer_format", [&] { return parse_answer_format(get_string(j, "answer_format", path)); });
    item.hop_scope = wrap_parse(path + ".hop_scope", [&] { return parse_hop_scope(get_string(j, "hop_scope", path)); });
    item.temporal_loc = wrap_parse(path + ".temporal_loc",
                                   [&] { return parse_temporal_location(get_string(j, "temporal_loc", path)); });
    item.window_ns = get_u64(j["window_ns"], path + ".window_ns");
    if (item.window_ns == 0) {
        schema_error(path + ".window_ns", "must be positive");
    }
    if (j.contains("entities")) {
        const auto epath = path + ".entities";
        expect_keys(j["entities"], epath, {}, {"cpus", "tids"});
        EntityFilter filter;
        if (j["entities"].contains("cpus")) {
            const auto& cpus = j["entities"]["cpus"];
            if (!cpus.is_array() || cpus.empty()) {
                schema_error(epath + ".cpus", "must be a non-empty array");
            }
            filter.cpus.emplace();
            for (std::size_t i = 0; i < cpus.size(); ++i) {
                filter.cpus->insert(static_cast<CpuId>(get_u64(cpus[i], fmt::format("{}.cpus[{}]", epath, i))));
            }
        }
        if (j["entities"].contains("tids")) {
            const auto& tids = j["entities"]["tids"];
            if (!tids.is_array() || tids.empty()) {
                schema_error(epath + ".tids", "must be a non-empty array");
            }
            filter.tids.emplace();
            for (std::size_t i = 0; i < tids.size(); ++i) {
                const auto tid = get_i64(tids[i], fmt::format("{}.tids[{}]", epath, i));
                if (tid <= 0) {
                    schema_error(fmt::format("{}.tids[{}]", epath, i), "must be a positive thread id");
                }
                filter.tids->insert(tid);
            }
        }
        item.entities = std::move(filter);
    }
    item.reference = parse_reference(j["reference"], path + ".reference", item.answer_format);
    return item;
}

ordered_json numeric_json(const NumericReference& n)
{
    return ordered_json{{"value", n.value}, {"unit", n.unit}, {"rel_tol", n.rel_tol}, {"loose_tol", n.loose_tol}};
}

ordered_json query_json(const OracleQuery& q)
{
    ordered_json j{{"op", to_string(q.op)}};
    if (q.tid) {
        j["tid"] = *q.tid;
    }
    if (q.cpu) {
        j["cpu"] = *q.cpu;
    }
    if (q.threshold_ns) {
        j["threshold_ns"] = *q.threshold_ns;
    }
    return j;
}

ordered_json reference_json(const ReferenceAnswer& ref)
{
    ordered_json j;
    if (const auto* n = std::get_if<NumericReference>(&ref.answer)) {
        j = ordered_json{{"kind", "numeric"}};
        j.update(numeric_json(*n));
    } else if (const auto* c = std::get_if<ChoiceReference>(&ref.answer)) {
        j = ordered_json{{"kind", "choice"}, {"letter", c->letter}, {"options", ordered_json::array()}};
        for (const auto& o : c->options) {
            j["options"].push_back(ordered_json{{"label", o.label}, {"text", o.text}, {"value", o.value}});
        }
    } else if (const auto* b = std::get_if<BooleanReference>(&ref.answer)) {
        j = ordered_json{{"kind", "boolean"}, {"value", b->value}};
    } else {
        const auto& e = std::get<EntityReference>(ref.answer);
        j = ordered_json{{"kind", "entity"}, {"canonical", e.canonical}, {"aliases", e.aliases}};
        if (e.quantity) {
            j["quantity"] = numeric_json(*e.quantity);
        }
    }
    if (ref.query) {
        j["query"] = query_json(*ref.query);
    }
    return j;
}

} // namespace

std::vector<BenchmarkItem> parse_benchmark(std::string_view json_text)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::item_schema, fmt::format("benchmark JSON does not parse: {}", e.what()));
    }
    if (!doc.is_array()) {
        schema_error("$", "benchmark must be a JSON array");
    }
    std::vector<BenchmarkItem> items;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto path = fmt::format("$[{}]", i);
        auto item = parse_item(doc[i], path);
        if (!ids.insert(item.id).second) {
            schema_error(path + ".id", fmt::format("duplicate id '{}'", item.id));
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io, fmt::format("cannot open benchmark '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_benchmark(buffer.str());
}

std::string serialize_benchmark(const std::vector<BenchmarkItem>& items)
{
    ordered_json doc = ordered_json::array();
    for (const auto& item : items) {
        ordered_json j{{"id", item.id},
                       {"prompt", item.prompt},
                       {"answer_format", to_string(item.answer_format)},
                       {"hop_scope", to_string(item.hop_scope)},
                       {"temporal_loc", to_string(item.temporal_loc)},
                       {"window_ns", item.window_ns}};
        if (item.entities) {
            ordered_json e = ordered_json::object();
            if (item.entities->cpus) {
                e["cpus"] = *item.entities->cpus;
            }
            if (item.entities->tids) {
                e["tids"] = *item.entities->tids;
            }
            j["entities"] = std::move(e);
        }
        j["reference"] = reference_json(item.reference);
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Scopes and inputs

QueryScope scope_for_window(const BenchmarkItem& item, Window window)
{
    QueryScope scope;
    scope.window = window;
    if (item.entities) {
        scope.cpus = item.entities->cpus;
        scope.tids = item.entities->tids;
    }
    return scope;
}

QueryScope scope_from_item(const BenchmarkItem& item, const TraceMeta& meta)
{
    if (item.window_ns == 0) {
        throw Error(Errc::item_schema, fmt::format("item '{}' has no window length", item.id));
    }
    return scope_for_window(item, window_for_location(meta, item.temporal_loc, item.window_ns));
}

std::string make_baseline_input(const Analytics& analytics, const QueryScope& scope)
{
    analytics.check(scope.window);
    std::set<CpuId> cpus;
    if (scope.cpus) {
        cpus = *scope.cpus;
    } else {
        for (CpuId c = 0; c < analytics.cpu_count(); ++c) {
            cpus.insert(c);
        }
    }
    std::vector<std::string> cpu_list;
    for (CpuId c : cpus) {
        cpu_list.push_back(std::to_string(c));
    }

    std::string out = fmt::format("# state values, window [{}, {}) ns, cpus {}\n", scope.window.t1, scope.window.t2,
                                  fmt::join(cpu_list, ","));
    out += "path\tstart_ns\tend_ns\tvalue\n";

    const auto& state = analytics.state();
    auto dump = [&](const AttributePath& path) {
        const auto quark = state.find_quark(path);
        if (!quark) {
            return;
        }
        const auto text = path.str();
        for (const auto& iv : state.query_range(*quark, scope.window.t1, scope.window.t2)) {
            if (iv.value.is_null()) {
                continue;
            }
            out += fmt::format("{}\t{}\t{}\t{}\n", text, iv.start, iv.end, iv.value.to_text());
        }
    };
    for (CpuId c : cpus) {
        dump(cpu_current_thread_path(c));
    }
    if (scope.tids) {
        for (Tid tid : *scope.tids) {
            dump(thread_status_path(tid));
        }
    }
    return out;
}

std::string make_events_input(const std::vector<Event>& events, Window window)
{
    std::string out;
    for (const auto& event : events) {
        if (event.ts >= window.t1 && event.ts < window.t2) {
            out += format_event_line(event);
            out += '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference resolution

namespace {

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

double express(const Quantity& q, std::string_view unit)
{
    if (q.unit.empty() || unit.empty()) {
        return static_cast<double>(q.value);
    }
    return static_cast<double>(q.value) / unit_factor(unit);
}

[[noreturn]] void mismatch(const BenchmarkItem& item)
{
    throw Error(Errc::item_schema, fmt::format("{}: query result does not fit the reference kind", item.id));
}

} // namespace

ReferenceAnswer resolve_reference(const BenchmarkItem& item, const Analytics& analytics, Window window)
{
    if (!item.reference.query) {
        return item.reference;
    }
    return reference_from_result(item, evaluate(*item.reference.query, analytics, window));
}

ReferenceAnswer reference_from_result(const BenchmarkItem& item, const QueryResult& result)
{
    ReferenceAnswer ref = item.reference;
    std::visit(
        [&](auto& answer) {
            using T = std::decay_t<decltype(answer)>;
            if constexpr (std::is_same_v<T, NumericReference>) {
                const auto* q = std::get_if<Quantity>(&result);
                if (!q) {
                    mismatch(item);
                }
                answer.value = express(*q, answer.unit);
            } else if constexpr (std::is_same_v<T, BooleanReference>) {
                const auto* b = std::get_if<bool>(&result);
                if (!b) {
                    mismatch(item);
                }
                answer.value = *b;
            } else if constexpr (std::is_same_v<T, ChoiceReference>) {
                const auto* e = std::get_if<EntityAnswer>(&result);
                if (!e) {
                    mismatch(item);
                }
                const auto letter = choice_letter_for(answer.options, e->id);
                if (!letter) {
                    throw Error(Errc::item_schema,
                                fmt::format("{}: no option covers the oracle answer '{}'", item.id, e->id));
                }
                answer.letter = *letter;
            } else {
                const auto* e = std::get_if<EntityAnswer>(&result);
                if (!e) {
                    mismatch(item);
                }
                answer.canonical = e->id;
                answer.aliases = default_aliases(e->id);
                if (answer.quantity) {
                    if (e->quantity) {
                        answer.quantity->value = express(*e->quantity, answer.quantity->unit);
                    } else {
                        answer.quantity.reset();
                    }
                }
            }
        },
        ref.answer);
    return ref;
}

// ---------------------------------------------------------------------------
// Seed benchmark

WorkloadSpec seed_workload()
{
    WorkloadSpec spec;
    spec.seed = 2026;
    spec.cpu_count = 4;
    spec.thread_count = 8;
    spec.duration = 240'000'000'000ULL;
    spec.mean_slice = 100'000'000ULL;
    spec.skew = 0.3;
    return spec;
}

std::vector<BenchmarkItem> make_seed_benchmark(const Analytics& analytics, const TraceMeta& meta)
{
    constexpr Duration s1 = 1'000'000'000ULL;
    constexpr Duration s10 = 10 * s1;
    constexpr Duration s100 = 100 * s1;
    using L = TemporalLocation;

    auto top_on = [&](CpuId cpu, L loc, Duration len) {
        const auto top = analytics.top_thread_on_cpu(cpu, window_for_location(meta, loc, len));
        return top ? top->tid : kFirstSyntheticTid;
    };

    std::vector<BenchmarkItem> items;
    auto add = [&](std::string id, std::string prompt, AnswerFormat format, HopScope hop, L loc, Duration len,
                   std::optional<EntityFilter> entities, ReferenceAnswer ref) {
        BenchmarkItem item;
        item.id = std::move(id);
        item.prompt = std::move(prompt);
        item.answer_format = format;
        item.hop_scope = hop;
        item.temporal_loc = loc;
        item.window_ns = len;
        item.entities = std::move(entities);
        item.reference = std::move(ref);
        item.reference = resolve_reference(item, analytics, window_for_location(meta, loc, len));
        items.push_back(std::move(item));
    };
    auto numeric = [](OracleQuery q) { return ReferenceAnswer{NumericReference{}, q}; };
    auto entity = [](OracleQuery q, bool with_quantity) {
        EntityReference e;
        if (with_quantity) {
            e.quantity = NumericReference{};
        }
        return ReferenceAnswer{e, q};
    };
    auto choice = [](OracleQuery q, std::vector<ChoiceOption> options) {
        return ReferenceAnswer{ChoiceReference{options.front().label, std::move(options)}, q};
    };
    auto boolean = [](OracleQuery q) { return ReferenceAnswer{BooleanReference{}, q}; };
    auto cpu_options = [](int count, bool none_option) {
        std::vector<ChoiceOption> options;
        for (int i = 0; i < count; ++i) {
            options.push_back(ChoiceOption{std::string(1, static_cast<char>('A' + i)), fmt::format("CPU_{}", i),
                                           fmt::format("cpu:{}", i)});
        }
        if (none_option) {
            options.push_back(ChoiceOption{std::string(1, static_cast<char>('A' + count)), "None of these", "none"});
        }
        return options;
    };
    auto with_options = [](std::string stem, const std::vector<ChoiceOption>& options) {
        for (const auto& o : options) {
            stem += fmt::format(" ({}) {}", o.label, o.text);
        }
        return stem;
    };
    auto tids = [](Tid t) { return EntityFilter{std::nullopt, std::set<Tid>{t}}; };
    auto cpus = [](CpuId c) { return EntityFilter{std::set<CpuId>{c}, std::nullopt}; };

    {
        const Tid t = top_on(0, L::mid, s1);
        add("expl-single-1", fmt::format("How many nanoseconds did thread {} spend running on CPU 0 in this window?", t),
            AnswerFormat::explanatory, HopScope::single, L::mid, s1,
            EntityFilter{std::set<CpuId>{0}, std::set<Tid>{t}}, numeric({QueryOp::cpu_time, t, 0, std::nullopt}));
    }
    {
        const Tid t = top_on(1, L::start, s10);
        add("expl-single-2", fmt::format("How long did thread {} run on CPU 1 in this window, in nanoseconds?", t),
            AnswerFormat::explanatory, HopScope::single, L::start, s10,
            EntityFilter{std::set<CpuId>{1}, std::set<Tid>{t}}, numeric({QueryOp::cpu_time, t, 1, std::nullopt}));
    }
    add("expl-multi-1", "Which CPU had the largest number of distinct threads run on it in this window?",
        AnswerFormat::explanatory, HopScope::multi, L::mid, s100, std::nullopt,
        entity({QueryOp::most_distinct_cpu, std::nullopt, std::nullopt, std::nullopt}, false));
    add("expl-multi-2", "Which CPU was busy for the longest time in this window, and for how many nanoseconds?",
        AnswerFormat::explanatory, HopScope::multi, L::end, s10, std::nullopt,
        entity({QueryOp::busiest_cpu, std::nullopt, std::nullopt, std::nullopt}, true));
    {
        const Tid t = top_on(1, L::start, s10);
        const auto options = cpu_options(3, true);
        add("mc-single-1", with_options(fmt::format("On which CPU did thread {} run the longest?", t), options),
            AnswerFormat::multiple_choice, HopScope::single, L::start, s10, tids(t),
            choice({QueryOp::primary_cpu, t, std::nullopt, std::nullopt}, options));
    }
    {
        const Tid t = top_on(2, L::mid, s1);
        const auto options = cpu_options(3, true);
        add("mc-single-2", with_options(fmt::format("On which CPU did thread {} run the longest?", t), options),
            AnswerFormat::multiple_choice, HopScope::single, L::mid, s1, tids(t),
            choice({QueryOp::primary_cpu, t, std::nullopt, std::nullopt}, options));
    }
    {
        const auto options = cpu_options(4, false);
        add("mc-multi-1", with_options("Which CPU was busy for the longest time?", options),
            AnswerFormat::multiple_choice, HopScope::multi, L::end, s10, std::nullopt,
            choice({QueryOp::busiest_cpu, std::nullopt, std::nullopt, std::nullopt}, options));
        add("mc-multi-2", with_options("Which CPU ran the most distinct threads?", options),
            AnswerFormat::multiple_choice, HopScope::multi, L::mid, s100, std::nullopt,
            choice({QueryOp::most_distinct_cpu, std::nullopt, std::nullopt, std::nullopt}, options));
    }
    add("tf-single-1", "True or False: CPU 2 was busy for more than 100000000000 ns in this window.",
        AnswerFormat::true_false, HopScope::single, L::mid, s10, cpus(2),
        boolean({QueryOp::busy_time_exceeds, std::nullopt, 2, 100'000'000'000ULL}));
    add("tf-single-2", "True or False: CPU 1 was busy for more than 500000000 ns in this window.",
        AnswerFormat::true_false, HopScope::single, L::start, s1, cpus(1),
        boolean({QueryOp::busy_time_exceeds, std::nullopt, 1, 500'000'000ULL}));
    add("tf-multi-1", "True or False: the busiest CPU in this window also ran the most distinct threads.",
        AnswerFormat::true_false, HopScope::multi, L::start, s10, std::nullopt,
        boolean({QueryOp::busiest_is_most_distinct, std::nullopt, std::nullopt, std::nullopt}));
    add("tf-multi-2",
        "True or False: in this window, the CPU with the most busy time also served the largest number of "
        "distinct threads.",
        AnswerFormat::true_false, HopScope::multi, L::end, s100, std::nullopt,
        boolean({QueryOp::busiest_is_most_distinct, std::nullopt, std::nullopt, std::nullopt}));
    return items;
}

} // namespace tracekg
