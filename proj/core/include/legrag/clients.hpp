#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace legrag {

struct DecodingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 2048;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    DecodingParams decoding;
};

/// A chat-completion model endpoint. complete() returns the assistant text.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual const std::string& client_id() const = 0;
    virtual const DecodingParams& decoding() const = 0;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Deterministic test double. Replies come from a responder function of the
/// request and the per-request-digest call ordinal, so replaying the same
/// call sequence reproduces the same transcript bit for bit.
class ScriptedChatClient final : public ChatClient {
public:
    using Responder = std::function<std::string(const ChatRequest&, std::size_t call_index)>;

    explicit ScriptedChatClient(Responder responder, DecodingParams decoding = {},
                                std::string id = "scripted-chat");

    /// Replays `replies` in call order regardless of content; the last reply
    /// repeats once the list is exhausted.
    static ScriptedChatClient fifo(std::vector<std::string> replies,
                                   DecodingParams decoding = {});

    const std::string& client_id() const override { return id_; }
    const DecodingParams& decoding() const override { return decoding_; }
    std::string complete(const ChatRequest& request) override;

    std::size_t calls() const;

private:
    Responder responder_;
    DecodingParams decoding_;
    std::string id_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::size_t> per_digest_calls_;
    std::size_t total_calls_ = 0;
};

/// Digest of a request, used to key scripted transcripts.
std::string chat_request_digest(const ChatRequest& request);

/// Scores candidate documents against a query; higher is more relevant.
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual const std::string& reranker_id() const = 0;
    virtual bool passthrough() const { return false; }
    virtual std::vector<double> score(const std::string& query,
                                      std::span<const std::string> documents) = 0;
};

/// Keeps the incoming (fusion) order and truncates.
class IdentityReranker final : public Reranker {
public:
    const std::string& reranker_id() const override {
        static const std::string id = "identity-passthrough";
        return id;
    }
    bool passthrough() const override { return true; }
    std::vector<double> score(const std::string&,
                              std::span<const std::string> documents) override {
        return std::vector<double>(documents.size(), 0.0);
    }
};

class ScriptedReranker final : public Reranker {
public:
    using Scorer = std::function<double(const std::string& query, const std::string& document)>;

    explicit ScriptedReranker(Scorer scorer, std::string id = "scripted-reranker")
        : scorer_(std::move(scorer)), id_(std::move(id)) {}

    const std::string& reranker_id() const override { return id_; }
    std::vector<double> score(const std::string& query,
                              std::span<const std::string> documents) override {
        std::vector<double> out;
        out.reserve(documents.size());
        for (const auto& d : documents) out.push_back(scorer_(query, d));
        return out;
    }

private:
    Scorer scorer_;
    std::string id_;
};

} // namespace legrag
