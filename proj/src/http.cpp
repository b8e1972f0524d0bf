#include "ace/http.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "ace/errors.hpp"

#include <httplib.h>

namespace ace {

HttplibTransport::HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.empty()) throw ConfigError("endpoint base_url empty");
}

HttpResponse HttplibTransport::post(const std::string& path, const std::string& json_body,
                                    const std::map<std::string, std::string>& headers) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, json_body, "application/json");
    if (!res)
        throw HttpError(0, "no response from " + base_url_ + path + " (" +
                               httplib::to_string(res.error()) + ")");
    return {res->status, res->body};
}

void ScriptedTransport::enqueue(int status, std::string body) {
    queue_.push_back({status, std::move(body)});
}

HttpResponse ScriptedTransport::post(const std::string& path, const std::string& json_body,
                                     const std::map<std::string, std::string>& headers) {
    requests_.push_back({path, json_body, headers});
    if (queue_.empty()) throw HttpError(0, "scripted transport exhausted");
    HttpResponse r = queue_.front();
    queue_.pop_front();
    return r;
}

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : rate_(requests_per_second),
      capacity_(std::max(1.0, burst)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {
    if (!(requests_per_second > 0.0)) throw ConfigError("rate must be positive");
}

void RateLimiter::acquire() {
    std::unique_lock lock(mu_);
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        double wait = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        lock.lock();
    }
}

std::string api_key_from_env(const EndpointConfig& config) {
    const char* v = std::getenv(config.api_key_env.c_str());
    return v ? v : "";
}

HttpResponse post_with_retries(HttpTransport& transport, const EndpointConfig& config,
                               const std::string& path, const std::string& body,
                               const std::function<void(double)>& sleep_fn) {
    std::map<std::string, std::string> headers;
    std::string key = api_key_from_env(config);
    if (!key.empty()) headers["Authorization"] = "Bearer " + key;

    auto sleep = sleep_fn ? sleep_fn : [](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };

    double backoff = config.backoff_initial_s;
    HttpResponse last{};
    std::string last_error;
    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        try {
            last = transport.post(path, body, headers);
            if (last.status >= 200 && last.status < 300) return last;
            last_error = "status " + std::to_string(last.status);
        } catch (const HttpError& e) {
            last = {0, ""};
            last_error = e.what();
        }
        if (attempt < config.max_attempts) {
            sleep(backoff);
            backoff *= config.backoff_factor;
        }
    }
    std::string excerpt = last.body.substr(0, 200);
    throw HttpError(last.status, "request to " + path + " failed after " +
                                     std::to_string(config.max_attempts) + " attempts (" +
                                     last_error + (excerpt.empty() ? "" : "): " + excerpt) +
                                     (excerpt.empty() ? ")" : ""));
}

}  // namespace ace
