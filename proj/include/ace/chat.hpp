#pragma once

#include <map>
#include <memory>
#include <string>

#include "ace/http.hpp"

namespace ace {

/// Chat-completion abstraction for the generation pipeline and LLM oracle.
/// `role` names the prompt stage (e.g. "area_gen", "task_solver") so fixture
/// transports can key canned replies by stage and call order.
class ChatTransport {
  public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::string& role, const std::string& system,
                                 const std::string& user) = 0;
};

/// OpenAI-compatible POST {base}/v1/chat/completions.
class LiveChatTransport : public ChatTransport {
  public:
    LiveChatTransport(std::shared_ptr<HttpTransport> transport, EndpointConfig config);
    std::string complete(const std::string& role, const std::string& system,
                         const std::string& user) override;

  private:
    std::shared_ptr<HttpTransport> transport_;
    EndpointConfig config_;
    RateLimiter limiter_;
};

/// Replays files from a fixture directory. The Nth call with a given role
/// reads "{role}_{NNN}.txt" (zero-padded, starting at 000).
class FixtureChatTransport : public ChatTransport {
  public:
    explicit FixtureChatTransport(std::string dir);
    std::string complete(const std::string& role, const std::string& system,
                         const std::string& user) override;

  private:
    std::string dir_;
    std::map<std::string, int> counters_;
};

}  // namespace ace
