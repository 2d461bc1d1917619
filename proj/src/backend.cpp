#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "callsum/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "callsum/java_lexer.hpp"

namespace callsum {

namespace {

std::string_view prefix_before(const std::string& tmpl, std::string_view placeholder)
{
    const auto p = tmpl.find(placeholder);
    return std::string_view(tmpl).substr(0, p == std::string::npos ? tmpl.size() : p);
}

std::string method_name_of(std::string_view src)
{
    const auto toks = lex_java(src);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind == TokenKind::identifier && !is_java_keyword(toks[i].text) && is_punct(toks[i + 1], "(")) {
            return std::string(toks[i].text);
        }
    }
    for (const auto& t : toks) {
        if (t.kind == TokenKind::identifier && !is_java_keyword(t.text)) return std::string(t.text);
    }
    return "code";
}

std::string describes(std::string_view src)
{
    static const Tokenizer counter = Tokenizer::fallback();
    return "describes " + method_name_of(src) + " with " + std::to_string(counter.count(src)) + " tokens.";
}

std::string why(std::string_view target)
{
    std::string out(kWhyPrefix);
    int taken = 0;
    for (const auto& t : lex_java(target)) {
        if (t.kind != TokenKind::identifier || is_java_keyword(t.text)) continue;
        out += ' ';
        out.append(t.text);
        if (++taken == 6) break;
    }
    return out + " .";
}

std::string mock_text(const std::string& text)
{
    const auto callers_prefix = prefix_before(template_text(TemplateId::caller_descriptions), "{context}");
    const auto consider_prefix = prefix_before(template_text(TemplateId::why), "{target code}");
    const auto instruction_prefix = prefix_before(template_text(TemplateId::method_instruction), "{target code}");
    const std::string_view s = text;

    if (s.starts_with(callers_prefix)) {
        std::string out;
        std::string_view rest = s.substr(callers_prefix.size());
        while (true) {
            const auto sep = rest.find(kCallerSeparator);
            if (!out.empty()) out += '\n';
            out += describes(rest.substr(0, sep));
            if (sep == std::string_view::npos) break;
            rest = rest.substr(sep + kCallerSeparator.size());
        }
        return out;
    }
    if (s.starts_with(consider_prefix)) {
        std::string_view rest = s.substr(consider_prefix.size());
        return why(rest.substr(0, rest.find(" And consider the ")));
    }
    if (s.starts_with("TDAT\n")) {
        std::string_view rest = s.substr(5);
        const auto ctx = rest.find("\nCONTEXT\n");
        const auto sum = rest.find("\nSUMMARY\n");
        if (ctx != std::string_view::npos && ctx < sum) return why(rest.substr(0, ctx));
        return describes(rest.substr(0, sum));
    }
    if (s.starts_with(instruction_prefix)) return describes(s.substr(instruction_prefix.size()));
    return describes(s);
}

std::string excerpt(const std::string& body)
{
    return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

Endpoint split_url(const std::string& url)
{
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

bool transient_status(int status) { return status == 429 || status >= 500; }

CompletionResult http_complete(const BackendConfig& cfg, const RenderedPrompt& prompt)
{
    std::string api_key;
    if (!cfg.api_key_env.empty()) {
        const char* v = std::getenv(cfg.api_key_env.c_str());
        if (!v || !*v) throw ConfigError("environment variable " + cfg.api_key_env + " holds no API key");
        api_key = v;
    }
    const Endpoint ep = split_url(cfg.endpoint_url);

    nlohmann::ordered_json body;
    body["model"] = cfg.model_name;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt.text}}});
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_output_tokens;
    const std::string payload = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::vector<std::string> log;
    std::mt19937_64 rng{std::random_device{}()};
    const auto started = std::chrono::steady_clock::now();

    for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
        if (attempt > 1) {
            // Full jitter: uniform in [0, base * 2^(attempt-2)].
            const double cap = cfg.backoff_base_ms * std::pow(2.0, attempt - 2);
            std::uniform_real_distribution<double> wait(0.0, cap);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait(rng)));
        }
        httplib::Client client(ep.scheme_host_port);
        const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        auto res = client.Post(ep.path, headers, payload, "application/json");
        if (!res) {
            log.push_back("attempt " + std::to_string(attempt) + ": " + httplib::to_string(res.error()));
            continue;
        }
        if (transient_status(res->status)) {
            log.push_back("attempt " + std::to_string(attempt) + ": HTTP " + std::to_string(res->status));
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw HttpStatusError("HTTP " + std::to_string(res->status) + " from " + cfg.endpoint_url + ": " +
                                      excerpt(res->body),
                                  res->status);
        }

        CompletionResult out;
        out.attempts = attempt;
        try {
            const auto j = nlohmann::json::parse(res->body);
            const auto& choice = j.at("choices").at(0);
            if (choice.contains("message")) {
                out.text = choice.at("message").at("content").get<std::string>();
            } else {
                out.text = choice.at("text").get<std::string>();
            }
            if (j.contains("usage")) {
                const auto& u = j["usage"];
                if (u.contains("prompt_tokens")) out.prompt_tokens = u["prompt_tokens"].get<std::size_t>();
                if (u.contains("completion_tokens")) out.output_tokens = u["completion_tokens"].get<std::size_t>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("malformed completion response: ") + e.what(), excerpt(res->body));
        }
        out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        return out;
    }
    throw TransportError("no successful response from " + cfg.endpoint_url + " after " +
                             std::to_string(cfg.max_retries + 1) + " attempt(s)",
                         std::move(log));
}

}  // namespace

void BackendConfig::validate() const
{
    if (parallelism < 1) throw ConfigError("backend " + name + ": parallelism must be >= 1");
    if (max_retries < 0) throw ConfigError("backend " + name + ": max_retries must be >= 0");
    if (temperature < 0) throw ConfigError("backend " + name + ": temperature must be >= 0");
    if (kind == BackendKind::http && (endpoint_url.empty() || model_name.empty())) {
        throw ConfigError("backend " + name + ": http backends need endpoint_url and model_name");
    }
}

BackendConfig BackendConfig::mock(std::string name)
{
    BackendConfig c;
    c.name = std::move(name);
    c.kind = BackendKind::mock;
    c.long_window = true;
    return c;
}

CompletionResult mock_complete(const RenderedPrompt& prompt)
{
    static const Tokenizer counter = Tokenizer::fallback();
    CompletionResult r;
    r.text = mock_text(prompt.text);
    r.prompt_tokens = counter.count(prompt.text);
    r.output_tokens = counter.count(r.text);
    r.attempts = 1;
    return r;
}

Backend::Backend(BackendConfig cfg)
{
    cfg.validate();
    state_ = std::make_shared<State>(cfg.parallelism);
    cfg_ = std::make_shared<const BackendConfig>(std::move(cfg));
}

CompletionResult Backend::complete(const RenderedPrompt& prompt) const
{
    state_->gate.acquire();
    struct Release {
        std::counting_semaphore<>& g;
        ~Release() { g.release(); }
    } release{state_->gate};
    state_->requests.fetch_add(1);

    CompletionResult r = cfg_->kind == BackendKind::mock ? mock_complete(prompt) : http_complete(*cfg_, prompt);
    if (r.text.empty()) r.warnings.push_back("empty completion text");
    return r;
}

std::map<std::string, BackendConfig> parse_backend_configs(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed backend config: ") + e.what());
    }
    std::map<std::string, BackendConfig> out;
    const auto& backends = j.contains("backends") ? j["backends"] : j;
    if (!backends.is_object()) throw ConfigError("backend config must map names to backend objects");
    for (const auto& [name, b] : backends.items()) {
        BackendConfig c;
        c.name = name;
        try {
            const std::string kind = b.value("kind", "mock");
            if (kind == "mock") {
                c = BackendConfig::mock(name);
            } else if (kind == "http") {
                c.kind = BackendKind::http;
                c.prompt_style = PromptStyle::instruction;
            } else {
                throw ConfigError("backend " + name + ": unknown kind " + kind);
            }
            c.endpoint_url = b.value("endpoint_url", c.endpoint_url);
            c.model_name = b.value("model_name", c.model_name);
            c.api_key_env = b.value("api_key_env", c.api_key_env);
            c.temperature = b.value("temperature", c.temperature);
            c.max_output_tokens = b.value("max_output_tokens", c.max_output_tokens);
            c.timeout_ms = b.value("timeout_ms", c.timeout_ms);
            c.max_retries = b.value("max_retries", c.max_retries);
            c.parallelism = b.value("parallelism", c.parallelism);
            c.backoff_base_ms = b.value("backoff_base_ms", c.backoff_base_ms);
            c.long_window = b.value("long_window", c.long_window);
            if (b.contains("prompt_style")) {
                const std::string style = b["prompt_style"].get<std::string>();
                if (style == "tdat") {
                    c.prompt_style = PromptStyle::tdat;
                } else if (style == "instruction") {
                    c.prompt_style = PromptStyle::instruction;
                } else {
                    throw ConfigError("backend " + name + ": unknown prompt_style " + style);
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("backend " + name + ": " + e.what());
        }
        c.validate();
        out.emplace(name, std::move(c));
    }
    return out;
}

std::map<std::string, BackendConfig> load_backend_configs(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read backend config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_backend_configs(ss.str());
}

}  // namespace callsum
