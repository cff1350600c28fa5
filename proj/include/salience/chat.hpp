#pragma once

// Chat-completion clients used for cluster labeling, with a prompt-hash replay cache.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace salience {

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Sends one user message and returns the first choice's content.
    virtual std::string complete(std::string_view prompt) = 0;
};

struct ChatEndpoint {
    std::string url;  // full chat-completions URL
    std::string model;
    std::string api_key;  // sent as a bearer token when nonempty; never persisted
};

/// POSTs {"model", "messages": [{"role": "user", "content": prompt}]} and reads
/// choices[0].message.content. Throws TransportError, QuotaError (429) or AuthError (401/403).
class RemoteChatClient : public ChatClient {
public:
    explicit RemoteChatClient(ChatEndpoint endpoint);
    std::string complete(std::string_view prompt) override;

private:
    ChatEndpoint endpoint_;
};

/// File name of a prompt in the replay cache.
std::string replay_key(std::string_view prompt);

/// Serves responses from `<dir>/<sha256(prompt)>.txt`. On a miss the live client (if any) is
/// called and its answer recorded; without one a miss throws TransportError.
class ReplayChatClient : public ChatClient {
public:
    explicit ReplayChatClient(std::filesystem::path dir, std::shared_ptr<ChatClient> live = nullptr);
    std::string complete(std::string_view prompt) override;

    void record(std::string_view prompt, std::string_view response) const;
    std::size_t live_calls() const { return live_calls_; }
    std::size_t replayed() const { return replayed_; }

private:
    std::filesystem::path dir_;
    std::shared_ptr<ChatClient> live_;
    std::size_t live_calls_ = 0;
    std::size_t replayed_ = 0;
};

}  // namespace salience
