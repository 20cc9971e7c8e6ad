#pragma once

#include "tracekg/knowledge_graph.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracekg {

/// Which representation of the trace is handed to the model.
enum class Grounding { baseline, taaf, taaf_no_schema, events };

std::string_view to_string(Grounding g) noexcept;
Grounding parse_grounding(std::string_view text);

/// The exact object handed to the model as the user message.
///
/// TAAF:     {"schema": "<text>", "graph": {...}, "user query": "<q>"}
/// baseline: {"state values": "<text>", "user query": "<q>"}
/// events:   {"events": "<text>", "user query": "<q>"}
class PromptEnvelope {
public:
    static PromptEnvelope graph(std::string schema, std::string graph_json, std::string question);
    static PromptEnvelope state_values(std::string text, std::string question);
    static PromptEnvelope raw_events(std::string text, std::string question);

    Grounding grounding() const noexcept { return grounding_; }
    const std::string& schema() const noexcept { return schema_; }
    const std::string& graph_json() const noexcept { return context_; }
    const std::string& context() const noexcept { return context_; }
    const std::string& user_query() const noexcept { return user_query_; }

    /// Compact JSON, keys in the order listed above.
    std::string serialize() const;

private:
    Grounding grounding_ = Grounding::taaf;
    std::string schema_;
    std::string context_;
    std::string user_query_;
};

/// Pairs the schema prompt and canonical graph JSON with the question. With
/// `schema_enabled == false` the schema key stays but its value is "".
/// Throws Error(format) for non-canonical graph JSON, Error(validation) for
/// an empty question.
PromptEnvelope assemble_prompt(const SchemaPrompt& schema, std::string_view graph_json, std::string_view question,
                               bool schema_enabled);

PromptEnvelope assemble_baseline_prompt(std::string_view state_text, std::string_view question);
PromptEnvelope assemble_events_prompt(std::string_view events_text, std::string_view question);

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    double temperature = 0.5;
    int samples = 3;
    bool schema_enabled = true;
    std::chrono::seconds timeout{120};
    int max_output_tokens = 1024;
    /// Prompts estimated above this many tokens (bytes / 4) are rejected.
    std::size_t max_context_tokens = 128000;
    std::string api_key_env = "TRACEKG_API_KEY";
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    /// Extra top-level request fields, merged verbatim (a JSON object).
    std::string options_json = "{}";
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};
};

void validate(const LlmConfig& cfg);

std::size_t estimate_tokens(std::string_view text) noexcept;

struct ModelAnswer {
    std::string raw_text;
    int sample_index = 0;
    double latency_ms = 0.0;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
};

struct Completion {
    std::string text;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
};

/// Anything that can turn a prompt into one completion.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual Completion complete(const std::string& prompt, const LlmConfig& cfg, int sample_index) = 0;
};

struct HttpResponse {
    int status = 0; ///< 0 when the request never produced a response
    std::string body;
    std::string error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                              std::chrono::seconds timeout) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                      std::chrono::seconds timeout) override;
};

inline constexpr std::string_view kSystemPrompt =
    "You answer questions about an operating-system execution trace. Use only the JSON context in the user "
    "message. Give the direct answer first, then a short justification.";

/// Chat-completion wire contract: POST {model, messages:[system,user],
/// temperature, max_tokens, ...options}; the answer is
/// choices[0].message.content.
class ChatCompletionClient final : public ModelClient {
public:
    explicit ChatCompletionClient(std::shared_ptr<HttpTransport> transport);

    Completion complete(const std::string& prompt, const LlmConfig& cfg, int sample_index) override;

    static std::string request_body(const std::string& prompt, const LlmConfig& cfg);
    static Completion parse_response(const std::string& body);

private:
    std::shared_ptr<HttpTransport> transport_;
};

/// Content-addressed store of model answers.
/// File format: JSON object {"<sha256 hex>": ["answer for sample 0", ...]}.
class Cassette {
public:
    Cassette() = default;
    Cassette(Cassette&& other) noexcept;
    Cassette& operator=(Cassette&& other) noexcept;

    static Cassette load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    static std::string key(const std::string& envelope, const std::string& model, double temperature);

    std::optional<std::string> lookup(const std::string& key, int sample_index) const;
    void store(const std::string& key, int sample_index, std::string answer);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> entries_;
};

enum class BridgeMode { live, record, replay };

/// Front door to the model. In replay mode no client exists, so no network
/// traffic is possible; a cassette miss is an error.
///
/// Concurrent `ask` calls are limited to `max_in_flight`; the samples of one
/// call are issued sequentially.
class Bridge {
public:
    static std::unique_ptr<Bridge> live(std::shared_ptr<ModelClient> client, std::size_t max_in_flight = 4);
    static std::unique_ptr<Bridge> record(std::shared_ptr<ModelClient> client, std::filesystem::path cassette,
                                          std::size_t max_in_flight = 4);
    static std::unique_ptr<Bridge> replay(const std::filesystem::path& cassette, std::size_t max_in_flight = 4);

    std::vector<ModelAnswer> ask(const PromptEnvelope& envelope, const LlmConfig& cfg);

    BridgeMode mode() const noexcept { return mode_; }
    std::uint64_t model_calls() const noexcept { return model_calls_.load(); }

private:
    Bridge(BridgeMode mode, std::shared_ptr<ModelClient> client, std::size_t max_in_flight);

    class Slot;

    BridgeMode mode_;
    std::shared_ptr<ModelClient> client_;
    Cassette cassette_;
    std::filesystem::path cassette_path_;
    std::atomic<std::uint64_t> model_calls_{0};

    std::mutex slot_mutex_;
    std::condition_variable slot_cv_;
    std::size_t in_flight_ = 0;
    std::size_t max_in_flight_;
    std::mutex save_mutex_;
};

std::string sha256_hex(std::string_view data);

} // namespace tracekg
