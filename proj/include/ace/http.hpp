#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ace {

struct HttpResponse {
    int status = 0;
    std::string body;
};

struct EndpointConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env = "ACE_API_KEY";
    int max_attempts = 3;
    double backoff_initial_s = 0.5;
    double backoff_factor = 2.0;
    double requests_per_second = 2.0;
};

/// Minimal POST-only transport so tests can swap in scripted responses.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& path, const std::string& json_body,
                              const std::map<std::string, std::string>& headers) = 0;
};

/// Live transport over cpp-httplib. base_url like "https://api.openai.com"
/// or "http://localhost:8080".
class HttplibTransport : public HttpTransport {
  public:
    explicit HttplibTransport(std::string base_url);
    HttpResponse post(const std::string& path, const std::string& json_body,
                      const std::map<std::string, std::string>& headers) override;

  private:
    std::string base_url_;
};

/// Test double: replays a queue of responses and records requests.
class ScriptedTransport : public HttpTransport {
  public:
    void enqueue(int status, std::string body);
    HttpResponse post(const std::string& path, const std::string& json_body,
                      const std::map<std::string, std::string>& headers) override;

    struct Request {
        std::string path;
        std::string body;
        std::map<std::string, std::string> headers;
    };
    const std::vector<Request>& requests() const { return requests_; }

  private:
    std::deque<HttpResponse> queue_;
    std::vector<Request> requests_;
};

/// Token bucket; acquire() blocks until a token is available.
class RateLimiter {
  public:
    explicit RateLimiter(double requests_per_second, double burst = 1.0);
    void acquire();

  private:
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

/// Reads the key from the configured environment variable; empty if unset.
std::string api_key_from_env(const EndpointConfig& config);

/// POSTs with Authorization and JSON content type, retrying non-2xx and
/// transport failures with exponential backoff. `sleep_fn` is injectable so
/// tests never wait.
HttpResponse post_with_retries(HttpTransport& transport, const EndpointConfig& config,
                               const std::string& path, const std::string& body,
                               const std::function<void(double)>& sleep_fn = {});

}  // namespace ace
