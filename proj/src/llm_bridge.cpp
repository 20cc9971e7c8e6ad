#include "tracekg/llm_bridge.hpp"

#include "tracekg/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>
#include "httplib.h"
#include "json.hpp"

namespace tracekg {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Grounding g) noexcept
{
    switch (g) {
    case Grounding::baseline: return "baseline";
    case Grounding::taaf: return "taaf";
    case Grounding::taaf_no_schema: return "taaf_noschema";
    case Grounding::events: return "events";
    }
    return "taaf";
}

Grounding parse_grounding(std::string_view text)
{
    for (auto g : {Grounding::baseline, Grounding::taaf, Grounding::taaf_no_schema, Grounding::events}) {
        if (to_string(g) == text) {
            return g;
        }
    }
    throw Error(Errc::parse, fmt::format("unknown grounding '{}'", text));
}

// ---------------------------------------------------------------------------

PromptEnvelope PromptEnvelope::graph(std::string schema, std::string graph_json, std::string question)
{
    PromptEnvelope env;
    env.grounding_ = Grounding::taaf;
    env.schema_ = std::move(schema);
    env.context_ = std::move(graph_json);
    env.user_query_ = std::move(question);
    return env;
}

PromptEnvelope PromptEnvelope::state_values(std::string text, std::string question)
{
    PromptEnvelope env;
    env.grounding_ = Grounding::baseline;
    env.context_ = std::move(text);
    env.user_query_ = std::move(question);
    return env;
}

PromptEnvelope PromptEnvelope::raw_events(std::string text, std::string question)
{
    PromptEnvelope env;
    env.grounding_ = Grounding::events;
    env.context_ = std::move(text);
    env.user_query_ = std::move(question);
    return env;
}

std::string PromptEnvelope::serialize() const
{
    const auto quoted = [](const std::string& s) { return json(s).dump(); };
    std::string out = "{";
    switch (grounding_) {
    case Grounding::taaf:
    case Grounding::taaf_no_schema:
        // the graph is already canonical JSON; embed it verbatim
        out += "\"schema\":" + quoted(schema_) + ",\"graph\":" + context_;
        break;
    case Grounding::baseline:
        out += "\"state values\":" + quoted(context_);
        break;
    case Grounding::events:
        out += "\"events\":" + quoted(context_);
        break;
    }
    out += ",\"user query\":" + quoted(user_query_) + "}";
    return out;
}

namespace {

void require_question(std::string_view question)
{
    if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw Error(Errc::validation, "question must not be empty");
    }
}

} // namespace

PromptEnvelope assemble_prompt(const SchemaPrompt& schema, std::string_view graph_json, std::string_view question,
                               bool schema_enabled)
{
    require_question(question);
    if (!is_canonical_graph_json(graph_json)) {
        throw Error(Errc::format, "graph JSON is not in canonical form");
    }
    return PromptEnvelope::graph(schema_enabled ? schema.text : std::string(), std::string(graph_json),
                                 std::string(question));
}

PromptEnvelope assemble_baseline_prompt(std::string_view state_text, std::string_view question)
{
    require_question(question);
    return PromptEnvelope::state_values(std::string(state_text), std::string(question));
}

PromptEnvelope assemble_events_prompt(std::string_view events_text, std::string_view question)
{
    require_question(question);
    return PromptEnvelope::raw_events(std::string(events_text), std::string(question));
}

void validate(const LlmConfig& cfg)
{
    if (!(cfg.temperature >= 0.0 && cfg.temperature <= 1.0)) {
        throw Error(Errc::validation, fmt::format("temperature {} outside [0, 1]", cfg.temperature));
    }
    if (cfg.samples < 1) {
        throw Error(Errc::validation, "samples must be >= 1");
    }
    if (cfg.model.empty()) {
        throw Error(Errc::validation, "model id must not be empty");
    }
    if (cfg.max_retries < 0) {
        throw Error(Errc::validation, "max_retries must be >= 0");
    }
    const auto options = json::parse(cfg.options_json, nullptr, false);
    if (options.is_discarded() || !options.is_object()) {
        throw Error(Errc::validation, "options must be a JSON object");
    }
}

std::size_t estimate_tokens(std::string_view text) noexcept
{
    return (text.size() + 3) / 4;
}

// ---------------------------------------------------------------------------

HttpResponse HttplibTransport::post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                                    std::chrono::seconds timeout)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        return HttpResponse{0, {}, fmt::format("endpoint '{}' has no scheme", url)};
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [name, value] : headers) {
        h.emplace(name, value);
    }
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
        return HttpResponse{0, {}, httplib::to_string(res.error())};
    }
    return HttpResponse{res->status, res->body, {}};
}

ChatCompletionClient::ChatCompletionClient(std::shared_ptr<HttpTransport> transport)
    : transport_(std::move(transport))
{
}

std::string ChatCompletionClient::request_body(const std::string& prompt, const LlmConfig& cfg)
{
    ordered_json body;
    body["model"] = cfg.model;
    body["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", kSystemPrompt}},
        ordered_json{{"role", "user"}, {"content", prompt}},
    });
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_output_tokens;
    const auto options = ordered_json::parse(cfg.options_json);
    for (const auto& [key, value] : options.items()) {
        body[key] = value;
    }
    return body.dump();
}

Completion ChatCompletionClient::parse_response(const std::string& body)
{
    const auto doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(Errc::format, "chat completion response is not a JSON object");
    }
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) {
        throw Error(Errc::format, "chat completion response has no choices");
    }
    const auto& message = (*choices)[0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
        throw Error(Errc::format, "chat completion choice has no text content");
    }
    Completion out;
    out.text = message["content"].get<std::string>();
    if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
        if (usage->contains("prompt_tokens") && (*usage)["prompt_tokens"].is_number_integer()) {
            out.prompt_tokens = (*usage)["prompt_tokens"].get<std::int64_t>();
        }
        if (usage->contains("completion_tokens") && (*usage)["completion_tokens"].is_number_integer()) {
            out.completion_tokens = (*usage)["completion_tokens"].get<std::int64_t>();
        }
    }
    return out;
}

Completion ChatCompletionClient::complete(const std::string& prompt, const LlmConfig& cfg, int /*sample_index*/)
{
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw Error(Errc::credential, fmt::format("environment variable {} is not set", cfg.api_key_env));
    }
    const HttpHeaders headers{{cfg.auth_header, cfg.auth_prefix + key}};
    const std::string body = request_body(prompt, cfg);

    HttpResponse last;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0 && cfg.retry_backoff.count() > 0) {
            std::this_thread::sleep_for(cfg.retry_backoff * attempt);
        }
        last = transport_->post(cfg.endpoint, headers, body, cfg.timeout);
        if (last.status == 401 || last.status == 403) {
            throw Error(Errc::credential, fmt::format("endpoint rejected credentials (HTTP {})", last.status));
        }
        if (last.status >= 200 && last.status < 300) {
            return parse_response(last.body);
        }
        if (last.status == 400 || last.status == 413) {
            if (last.body.find("context_length") != std::string::npos
                || last.body.find("maximum context") != std::string::npos || last.status == 413) {
                throw Error(Errc::context_limit, fmt::format("endpoint reports the prompt exceeds the context "
                                                             "window (HTTP {})",
                                                             last.status));
            }
        }
        const bool transient = last.status == 0 || last.status == 408 || last.status == 429 || last.status >= 500;
        if (!transient) {
            break;
        }
    }
    throw Error(Errc::transport,
                fmt::format("request failed after retries; last status {}{}", last.status,
                            last.error.empty() ? std::string() : " (" + last.error + ")"));
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::io, "SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

Cassette::Cassette(Cassette&& other) noexcept
{
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
}

Cassette& Cassette::operator=(Cassette&& other) noexcept
{
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        entries_ = std::move(other.entries_);
    }
    return *this;
}

Cassette Cassette::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io, fmt::format("cannot open cassette '{}'", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto doc = json::parse(buffer.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(Errc::format, fmt::format("cassette '{}' is not a JSON object", path.string()));
    }
    Cassette cassette;
    for (const auto& [key, answers] : doc.items()) {
        if (!answers.is_array()) {
            throw Error(Errc::format, fmt::format("cassette entry '{}' is not a list", key));
        }
        auto& list = cassette.entries_[key];
        for (const auto& answer : answers) {
            if (!answer.is_string()) {
                throw Error(Errc::format, fmt::format("cassette entry '{}' holds a non-string answer", key));
            }
            list.push_back(answer.get<std::string>());
        }
    }
    return cassette;
}

void Cassette::save(const std::filesystem::path& path) const
{
    json doc = json::object();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [key, answers] : entries_) {
            doc[key] = answers;
        }
    }
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::io, fmt::format("cannot write cassette '{}'", path.string()));
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::string Cassette::key(const std::string& envelope, const std::string& model, double temperature)
{
    std::string material = envelope;
    material += '\0';
    material += model;
    material += '\0';
    material += fmt::format("{}", temperature);
    return sha256_hex(material);
}

std::optional<std::string> Cassette::lookup(const std::string& key, int sample_index) const
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end() || sample_index < 0 || static_cast<std::size_t>(sample_index) >= it->second.size()) {
        return std::nullopt;
    }
    return it->second[static_cast<std::size_t>(sample_index)];
}

void Cassette::store(const std::string& key, int sample_index, std::string answer)
{
    std::lock_guard lock(mutex_);
    auto& list = entries_[key];
    if (list.size() <= static_cast<std::size_t>(sample_index)) {
        list.resize(static_cast<std::size_t>(sample_index) + 1);
    }
    list[static_cast<std::size_t>(sample_index)] = std::move(answer);
}

std::size_t Cassette::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------

class Bridge::Slot {
public:
    explicit Slot(Bridge& bridge) : bridge_(bridge)
    {
        std::unique_lock lock(bridge_.slot_mutex_);
        bridge_.slot_cv_.wait(lock, [&] { return bridge_.in_flight_ < bridge_.max_in_flight_; });
        ++bridge_.in_flight_;
    }
    ~Slot()
    {
        {
            std::lock_guard lock(bridge_.slot_mutex_);
            --bridge_.in_flight_;
        }
        bridge_.slot_cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Bridge& bridge_;
};

Bridge::Bridge(BridgeMode mode, std::shared_ptr<ModelClient> client, std::size_t max_in_flight)
    : mode_(mode), client_(std::move(client)), max_in_flight_(std::max<std::size_t>(1, max_in_flight))
{
}

std::unique_ptr<Bridge> Bridge::live(std::shared_ptr<ModelClient> client, std::size_t max_in_flight)
{
    if (!client) {
        throw Error(Errc::validation, "live mode needs a model client");
    }
    return std::unique_ptr<Bridge>(new Bridge(BridgeMode::live, std::move(client), max_in_flight));
}

std::unique_ptr<Bridge> Bridge::record(std::shared_ptr<ModelClient> client, std::filesystem::path cassette,
                                       std::size_t max_in_flight)
{
    if (!client) {
        throw Error(Errc::validation, "record mode needs a model client");
    }
    auto bridge = std::unique_ptr<Bridge>(new Bridge(BridgeMode::record, std::move(client), max_in_flight));
    if (std::filesystem::exists(cassette)) {
        bridge->cassette_ = Cassette::load(cassette);
    }
    bridge->cassette_path_ = std::move(cassette);
    return bridge;
}

std::unique_ptr<Bridge> Bridge::replay(const std::filesystem::path& cassette, std::size_t max_in_flight)
{
    auto bridge = std::unique_ptr<Bridge>(new Bridge(BridgeMode::replay, nullptr, max_in_flight));
    bridge->cassette_ = Cassette::load(cassette);
    return bridge;
}

std::vector<ModelAnswer> Bridge::ask(const PromptEnvelope& envelope, const LlmConfig& cfg)
{
    validate(cfg);
    const std::string prompt = envelope.serialize();
    const auto tokens = estimate_tokens(prompt) + estimate_tokens(kSystemPrompt);
    if (tokens > cfg.max_context_tokens) {
        throw Error(Errc::context_limit, fmt::format("prompt needs about {} tokens, limit is {}", tokens,
                                                     cfg.max_context_tokens));
    }
    const std::string key = Cassette::key(prompt, cfg.model, cfg.temperature);

    Slot slot(*this);
    std::vector<ModelAnswer> answers;
    for (int i = 0; i < cfg.samples; ++i) {
        ModelAnswer answer;
        answer.sample_index = i;
        const auto started = std::chrono::steady_clock::now();
        if (mode_ == BridgeMode::replay) {
            auto hit = cassette_.lookup(key, i);
            if (!hit) {
                throw Error(Errc::cache_miss, fmt::format("no recorded answer for {} sample {}", key, i));
            }
            answer.raw_text = std::move(*hit);
        } else {
            ++model_calls_;
            auto completion = client_->complete(prompt, cfg, i);
            answer.raw_text = std::move(completion.text);
            answer.prompt_tokens = completion.prompt_tokens;
            answer.completion_tokens = completion.completion_tokens;
            if (mode_ == BridgeMode::record) {
                cassette_.store(key, i, answer.raw_text);
            }
        }
        answer.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        answers.push_back(std::move(answer));
    }
    if (mode_ == BridgeMode::record) {
        std::lock_guard lock(save_mutex_);
        cassette_.save(cassette_path_);
    }
    return answers;
}

} // namespace tracekg
