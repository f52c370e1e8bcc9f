#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "peerreview/core.hpp"
#include "peerreview/errors.hpp"

namespace peerreview {

// Uniform chat-completion interface over remote model APIs plus a scripted
// mock for offline, byte-reproducible runs.

enum class BackendKind { openai_chat, anthropic_chat, mock };

inline const char* to_string(BackendKind k) {
    switch (k) {
        case BackendKind::openai_chat: return "openai_chat";
        case BackendKind::anthropic_chat: return "anthropic_chat";
        case BackendKind::mock: return "mock";
    }
    return "mock";
}

inline BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "openai_chat") return BackendKind::openai_chat;
    if (s == "anthropic_chat") return BackendKind::anthropic_chat;
    if (s == "mock") return BackendKind::mock;
    throw config_error("unknown backend kind: " + s);
}

struct BackendConfig {
    std::string id;
    BackendKind kind = BackendKind::mock;
    std::string model_name;
    std::string endpoint_url;
    std::string api_key_env; // name of the env var holding the key; never the key itself
    int max_retries = 3;
    std::chrono::milliseconds retry_base_delay{1000};
    std::chrono::milliseconds request_timeout{60000};
    std::optional<double> temperature; // unset defers to the provider default
    int max_tokens = 1024;             // required by the anthropic wire format
    int max_in_flight = 0;             // 0 = unlimited concurrent requests
};

inline void validate(const BackendConfig& cfg) {
    if (cfg.id.empty()) throw config_error("backend id must be nonempty");
    if (cfg.max_retries < 0) throw config_error("max_retries must be >= 0");
    if (cfg.request_timeout.count() <= 0) throw config_error("request_timeout must be > 0");
    bool remote = cfg.kind != BackendKind::mock;
    if (remote && cfg.api_key_env.empty())
        throw config_error("backend '" + cfg.id + "': api_key_env required for remote kinds");
    if (!remote && !cfg.api_key_env.empty())
        throw config_error("backend '" + cfg.id + "': api_key_env is forbidden for the mock kind");
    if (remote && cfg.endpoint_url.empty())
        throw config_error("backend '" + cfg.id + "': endpoint_url required");
}

// ---------------------------------------------------------------------------
// Request fingerprint
// ---------------------------------------------------------------------------

// Stable 64-bit FNV-1a over the rendered message list, hex encoded.
// Encoding per message: role bytes, 0x1F, content bytes, 0x1E. The empty
// list hashes to the FNV offset basis "cbf29ce484222325". Keyed mock
// scripts address responses by this value, so it must never change.
inline std::string fingerprint(const std::vector<Message>& messages) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const char* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& m : messages) {
        const char* role = to_string(m.role);
        mix(role, std::char_traits<char>::length(role));
        char rs = '\x1f';
        mix(&rs, 1);
        mix(m.content.data(), m.content.size());
        char fs = '\x1e';
        mix(&fs, 1);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Backend interface
// ---------------------------------------------------------------------------

struct CompletionRequest {
    std::vector<Message> messages;
    // Which agent is asking. Remote backends ignore it; the mock uses it to
    // route ordered script entries.
    int agent_index = 0;
};

namespace detail {

// Dynamic counting semaphore (std::counting_semaphore fixes its ceiling at
// compile time, which does not fit a config value).
class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int count_;
};

} // namespace detail

// A backend handle is safe to share between concurrent tasks. When the
// config sets max_in_flight, requests beyond the limit block until a slot
// frees up.
class Backend {
public:
    explicit Backend(BackendConfig cfg) : config_(std::move(cfg)) {
        validate(config_);
        if (config_.max_in_flight > 0)
            limiter_ = std::make_unique<detail::Semaphore>(config_.max_in_flight);
    }
    virtual ~Backend() = default;

    const BackendConfig& config() const { return config_; }

    // Sends one chat completion and returns the full assistant text.
    std::string complete(const CompletionRequest& req) {
        if (req.messages.empty()) throw structural_error("complete: messages must be nonempty");
        for (const auto& m : req.messages) {
            if (m.role == Role::system) continue;
            if (m.role != Role::user)
                throw structural_error("complete: first non-system message must be a user turn");
            break;
        }
        if (limiter_) {
            limiter_->acquire();
            struct Release {
                detail::Semaphore* s;
                ~Release() { s->release(); }
            } release{limiter_.get()};
            return do_complete(req);
        }
        return do_complete(req);
    }

protected:
    virtual std::string do_complete(const CompletionRequest& req) = 0;

private:
    BackendConfig config_;
    std::unique_ptr<detail::Semaphore> limiter_;
};

// ---------------------------------------------------------------------------
// Scripted mock
// ---------------------------------------------------------------------------

// Canned responses for offline runs. Keyed entries (request fingerprint ->
// text) take precedence; otherwise entries are consumed in request order
// from the per-agent lists. Exhaustion is an error, never silent recycling.
struct MockScript {
    std::map<int, std::vector<std::string>> ordered;
    std::unordered_map<std::string, std::string> keyed;

    static MockScript from_json(const nlohmann::json& j) {
        MockScript s;
        if (j.contains("ordered")) {
            for (const auto& [agent, texts] : j.at("ordered").items()) {
                auto& list = s.ordered[std::stoi(agent)];
                for (const auto& t : texts) list.push_back(t.get<std::string>());
            }
        }
        if (j.contains("keyed")) {
            for (const auto& [fp, text] : j.at("keyed").items())
                s.keyed[fp] = text.get<std::string>();
        }
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["ordered"] = nlohmann::json::object();
        for (const auto& [agent, texts] : ordered) j["ordered"][std::to_string(agent)] = texts;
        j["keyed"] = nlohmann::json::object();
        for (const auto& [fp, text] : keyed) j["keyed"][fp] = text;
        return j;
    }
};

class MockBackend : public Backend {
public:
    MockBackend(BackendConfig cfg, MockScript script)
        : Backend(std::move(cfg)), script_(std::move(script)) {}

protected:
    std::string do_complete(const CompletionRequest& req) override {
        auto keyed = script_.keyed.find(fingerprint(req.messages));
        if (keyed != script_.keyed.end()) return keyed->second;

        std::lock_guard lock(mu_); // ordered consumption is serialized per agent
        auto it = script_.ordered.find(req.agent_index);
        std::size_t& next = cursor_[req.agent_index];
        if (it == script_.ordered.end() || next >= it->second.size())
            throw backend_error("mock script exhausted for agent " + std::to_string(req.agent_index));
        return it->second[next++];
    }

private:
    MockScript script_;
    std::mutex mu_;
    std::map<int, std::size_t> cursor_;
};

} // namespace peerreview
