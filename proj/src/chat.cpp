#include "salience/chat.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <fstream>
#include <sstream>

#include "salience/errors.hpp"
#include "salience/hashing.hpp"
#include "salience/http.hpp"

namespace salience {

using nlohmann::json;

RemoteChatClient::RemoteChatClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.url.empty()) throw ConfigError("chat endpoint url is empty");
    if (endpoint_.model.empty()) throw ConfigError("chat model name is empty");
}

std::string RemoteChatClient::complete(std::string_view prompt) {
    const auto [origin, path] = http::split_url(endpoint_.url);
    const json request{{"model", endpoint_.model},
                       {"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})}};
    http::Headers headers;
    if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
    const auto response = http::post(origin, path, request.dump(-1, ' ', false, json::error_handler_t::replace),
                                     "application/json", headers);
    if (response.status == 429) throw QuotaError("chat endpoint rate limit or quota exceeded", 429);
    if (response.status == 401 || response.status == 403)
        throw AuthError(fmt::format("chat endpoint rejected credentials (HTTP {})", response.status), response.status);
    if (response.status != 200)
        throw TransportError(fmt::format("chat endpoint returned HTTP {}", response.status), response.status);
    try {
        const json body = json::parse(response.body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(fmt::format("malformed chat response: {}", e.what()), response.status);
    }
}

std::string replay_key(std::string_view prompt) { return sha256_hex(prompt); }

ReplayChatClient::ReplayChatClient(std::filesystem::path dir, std::shared_ptr<ChatClient> live)
    : dir_(std::move(dir)), live_(std::move(live)) {}

std::string ReplayChatClient::complete(std::string_view prompt) {
    const auto path = dir_ / (replay_key(prompt) + ".txt");
    if (std::ifstream in{path, std::ios::binary}) {
        std::ostringstream buf;
        buf << in.rdbuf();
        ++replayed_;
        return buf.str();
    }
    if (!live_) throw TransportError(fmt::format("no replay entry {} and no live chat client", path.string()));
    std::string response = live_->complete(prompt);
    ++live_calls_;
    record(prompt, response);
    return response;
}

void ReplayChatClient::record(std::string_view prompt, std::string_view response) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto path = dir_ / (replay_key(prompt) + ".txt");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << response;
    if (!out) throw IoError(fmt::format("cannot write replay entry {}", path.string()));
}

}  // namespace salience
