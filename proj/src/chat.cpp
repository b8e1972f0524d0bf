#include "ace/chat.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ace/errors.hpp"

namespace ace {

using nlohmann::json;

LiveChatTransport::LiveChatTransport(std::shared_ptr<HttpTransport> transport,
                                     EndpointConfig config)
    : transport_(std::move(transport)),
      config_(std::move(config)),
      limiter_(config_.requests_per_second) {}

std::string LiveChatTransport::complete(const std::string&, const std::string& system,
                                        const std::string& user) {
    json body;
    body["model"] = config_.model;
    body["messages"] = json::array();
    if (!system.empty()) body["messages"].push_back({{"role", "system"}, {"content", system}});
    body["messages"].push_back({{"role", "user"}, {"content", user}});

    limiter_.acquire();
    HttpResponse res =
        post_with_retries(*transport_, config_, "/v1/chat/completions", body.dump());
    try {
        json parsed = json::parse(res.body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError("chat response not in expected shape (" + std::string(e.what()) +
                         "): " + res.body.substr(0, 200));
    }
}

FixtureChatTransport::FixtureChatTransport(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) throw ConfigError("fixture directory empty");
    while (dir_.size() > 1 && dir_.back() == '/') dir_.pop_back();
}

std::string FixtureChatTransport::complete(const std::string& role, const std::string&,
                                           const std::string&) {
    int n = counters_[role]++;
    char suffix[8];
    std::snprintf(suffix, sizeof(suffix), "%03d", n);
    std::string path = dir_ + "/" + role + "_" + suffix + ".txt";
    std::ifstream in(path);
    if (!in) throw Error("fixture not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ace
