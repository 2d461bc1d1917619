#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "callsum/error.hpp"
#include "callsum/prompts.hpp"

namespace callsum {

enum class BackendKind { mock, http };

// Which prompt family a backend understands: the TDAT headers of the small
// code model, or free-form instructions for chat models.
enum class PromptStyle { tdat, instruction };

struct BackendConfig {
    std::string name = "mock";
    BackendKind kind = BackendKind::mock;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env;
    double temperature = 0.0;
    std::size_t max_output_tokens = 128;
    int timeout_ms = 60000;
    int max_retries = 3;
    int parallelism = 1;
    int backoff_base_ms = 500;
    bool long_window = false;
    PromptStyle prompt_style = PromptStyle::tdat;

    void validate() const;
    static BackendConfig mock(std::string name = "mock");
};

struct CompletionResult {
    std::string text;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> output_tokens;
    long latency_ms = 0;
    int attempts = 1;
    std::vector<std::string> warnings;
};

/// Retries exhausted on transient failures (network errors, 429, 5xx).
class TransportError : public Error {
public:
    TransportError(const std::string& what, std::vector<std::string> attempt_log)
        : Error(what), attempt_log(std::move(attempt_log)) {}
    std::vector<std::string> attempt_log;
};

/// The server answered with a body that does not follow the wire schema.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, std::string body_excerpt)
        : Error(what), body_excerpt(std::move(body_excerpt)) {}
    std::string body_excerpt;
};

/// Non-transient HTTP failure (4xx other than 429). Not retried.
class HttpStatusError : public Error {
public:
    HttpStatusError(const std::string& what, int status) : Error(what), status(status) {}
    int status;
};

/// Deterministic stand-in for a model: a pure function of the prompt bytes.
///  - caller-description prompts: one line per embedded method,
///    "describes <name> with <n> tokens."
///  - why-style prompts (Template B, project baseline, TDAT with CONTEXT):
///    "This method is used to <first six identifiers of the target> ."
///  - everything else (TDAT, single-method instruction): the describes form
///    for the target method.
CompletionResult mock_complete(const RenderedPrompt& prompt);

/// Shareable handle over one configured backend. At most `parallelism`
/// requests are in flight across all copies.
class Backend {
public:
    explicit Backend(BackendConfig cfg);

    CompletionResult complete(const RenderedPrompt& prompt) const;

    const BackendConfig& config() const { return *cfg_; }
    const std::string& name() const { return cfg_->name; }
    std::size_t requests_issued() const { return state_->requests.load(); }

private:
    struct State {
        explicit State(int n) : gate(n) {}
        std::counting_semaphore<> gate;
        std::atomic<std::size_t> requests{0};
    };
    std::shared_ptr<const BackendConfig> cfg_;
    std::shared_ptr<State> state_;
};

/// JSON config: {"backends": {"<name>": {kind, endpoint_url, ...}}}.
std::map<std::string, BackendConfig> load_backend_configs(const std::filesystem::path& path);
std::map<std::string, BackendConfig> parse_backend_configs(const std::string& json_text);

}  // namespace callsum
