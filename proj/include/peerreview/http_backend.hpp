#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "peerreview/backend.hpp"
#include "peerreview/errors.hpp"

namespace peerreview {

namespace detail {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;   // leading slash, "/" when absent
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw config_error("endpoint_url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace detail

// Chat client for OpenAI-style and Anthropic-style wire formats. Transient
// failures (HTTP 429/5xx, timeouts, connection errors) are retried with
// exponential backoff up to max_retries; auth failures and malformed
// responses are not retried. A parsed 200 body is never re-requested.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg) : Backend(std::move(cfg)) {
        const char* key = std::getenv(config().api_key_env.c_str());
        if (key == nullptr || *key == '\0')
            throw config_error("backend '" + config().id + "': environment variable " +
                               config().api_key_env + " is not set");
        api_key_ = key;
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (config().endpoint_url.rfind("https://", 0) == 0)
            throw config_error("built without TLS support; https endpoints unavailable");
#endif
    }

protected:
    std::string do_complete(const CompletionRequest& req) override {
        const auto& cfg = config();
        auto url = detail::split_url(cfg.endpoint_url);
        std::string body = cfg.kind == BackendKind::anthropic_chat
                               ? anthropic_body(req)
                               : openai_body(req);
        httplib::Headers headers;
        if (cfg.kind == BackendKind::anthropic_chat) {
            headers.emplace("x-api-key", api_key_);
            headers.emplace("anthropic-version", "2023-06-01");
        } else {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }

        int attempts = 0;
        int last_status = 0;
        auto delay = cfg.retry_base_delay;
        for (;;) {
            ++attempts;
            httplib::Client client(url.origin);
            client.set_connection_timeout(cfg.request_timeout);
            client.set_read_timeout(cfg.request_timeout);
            client.set_write_timeout(cfg.request_timeout);
            auto result = client.Post(url.path, headers, body, "application/json");

            bool transient;
            if (!result) {
                transient = true; // timeout or connection failure
                last_status = 0;
            } else {
                last_status = result->status;
                if (result->status == 200) {
                    return cfg.kind == BackendKind::anthropic_chat
                               ? parse_anthropic(result->body)
                               : parse_openai(result->body);
                }
                if (result->status == 401 || result->status == 403)
                    throw config_error("backend '" + cfg.id + "': authorization rejected (HTTP " +
                                       std::to_string(result->status) + ")");
                transient = result->status == 429 || result->status >= 500;
                if (!transient)
                    throw backend_error("backend '" + cfg.id + "': HTTP " +
                                            std::to_string(result->status) + ": " + result->body,
                                        result->status);
            }
            if (attempts > cfg.max_retries)
                throw backend_error("backend '" + cfg.id + "': retries exhausted after " +
                                        std::to_string(attempts) + " attempts (last status " +
                                        std::to_string(last_status) + ")",
                                    last_status);
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }

private:
    std::string openai_body(const CompletionRequest& req) const {
        nlohmann::json j;
        j["model"] = config().model_name;
        j["messages"] = nlohmann::json::array();
        for (const auto& m : req.messages)
            j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
        if (config().temperature) j["temperature"] = *config().temperature;
        return j.dump();
    }

    std::string anthropic_body(const CompletionRequest& req) const {
        nlohmann::json j;
        j["model"] = config().model_name;
        j["max_tokens"] = config().max_tokens;
        j["messages"] = nlohmann::json::array();
        for (const auto& m : req.messages) {
            if (m.role == Role::system) {
                j["system"] = m.content;
                continue;
            }
            j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
        }
        if (config().temperature) j["temperature"] = *config().temperature;
        return j.dump();
    }

    static std::string parse_openai(const std::string& body) {
        try {
            auto j = nlohmann::json::parse(body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw protocol_error(std::string("malformed openai response: ") + e.what());
        }
    }

    static std::string parse_anthropic(const std::string& body) {
        try {
            auto j = nlohmann::json::parse(body);
            for (const auto& block : j.at("content")) {
                if (block.at("type").get<std::string>() == "text")
                    return block.at("text").get<std::string>();
            }
            throw protocol_error("anthropic response has no text block");
        } catch (const nlohmann::json::exception& e) {
            throw protocol_error(std::string("malformed anthropic response: ") + e.what());
        }
    }

    std::string api_key_;
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                             const MockScript* script = nullptr) {
    if (cfg.kind == BackendKind::mock) {
        if (script == nullptr)
            throw config_error("backend '" + cfg.id + "': mock kind requires a script");
        return std::make_unique<MockBackend>(cfg, *script);
    }
    return std::make_unique<HttpBackend>(cfg);
}

} // namespace peerreview
