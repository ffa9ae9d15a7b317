#include "ac/annotate.hpp"
#include "ac/error.hpp"

#include "httplib.h"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>

namespace ac {

namespace {

// Portable counting gate for the in-flight request cap.
class RequestGate {
public:
    explicit RequestGate(int capacity) : available_(capacity > 0 ? capacity : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        ready_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    int available_;
};

class HttpChatTransport final : public ChatTransport {
public:
    explicit HttpChatTransport(AnnotatorConfig config)
        : config_(std::move(config)), gate_(config_.max_in_flight) {}

    std::string complete(const std::vector<Message>& messages) const override {
        Json body;
        body["model"] = config_.model;
        Json msgs = Json::array();
        for (const auto& m : messages) {
            Json one;
            one["role"] = m.role;
            one["content"] = m.content;
            msgs.push_back(std::move(one));
        }
        body["messages"] = std::move(msgs);
        body["temperature"] = config_.temperature;

        gate_.acquire();
        struct Release {
            RequestGate& gate;
            ~Release() { gate.release(); }
        } release{gate_};

        httplib::Client client(config_.base_url);
        const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }

        auto response = client.Post(config_.endpoint_path, headers, body.dump(),
                                    "application/json");
        if (!response) {
            fail(Errc::ServiceUnreachable,
                 "POST " + config_.base_url + config_.endpoint_path + " failed: " +
                     httplib::to_string(response.error()));
        }
        if (response->status < 200 || response->status >= 300) {
            fail(Errc::ServiceUnreachable,
                 "POST " + config_.endpoint_path + " returned status " +
                     std::to_string(response->status));
        }

        Json doc = Json::parse(response->body, nullptr, false);
        if (doc.is_discarded()) {
            fail(Errc::ServiceUnreachable, "response body is not JSON");
        }
        // Chat-completions envelope; a bare {"content": ...} is also accepted.
        try {
            if (doc.contains("choices") && doc.at("choices").is_array() &&
                !doc.at("choices").empty()) {
                const Json& first = doc.at("choices").at(0);
                if (first.contains("message") && first.at("message").contains("content")) {
                    return first.at("message").at("content").get<std::string>();
                }
                if (first.contains("text")) {
                    return first.at("text").get<std::string>();
                }
            }
            if (doc.contains("content") && doc.at("content").is_string()) {
                return doc.at("content").get<std::string>();
            }
        } catch (const Json::exception& e) {
            fail(Errc::ServiceUnreachable, std::string("unusable response envelope: ") + e.what());
        }
        fail(Errc::ServiceUnreachable, "response carries no completion content");
    }

private:
    AnnotatorConfig config_;
    mutable RequestGate gate_;
};

} // namespace

std::unique_ptr<ChatTransport> make_http_transport(const AnnotatorConfig& config) {
    return std::make_unique<HttpChatTransport>(config);
}

} // namespace ac
