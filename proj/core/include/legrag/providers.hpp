#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "legrag/clients.hpp"
#include "legrag/concurrency.hpp"
#include "legrag/index.hpp"

namespace legrag {

/// Connection settings for one remote model API. Credentials come from the
/// environment, never from config files.
struct RemoteEndpoint {
    std::string base_url; // "http://host:port"
    std::string path;     // e.g. "/v1/embeddings"
    std::string model;
    std::string api_key;
    int timeout_seconds = 60;
    int max_attempts = 3; // exponential backoff on transport errors and 429/5xx
    std::chrono::milliseconds min_interval{0};
    std::chrono::milliseconds backoff_base{200};
};

/// POST {"model","input":[texts]} -> {"data":[{"embedding":[floats]},...]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(RemoteEndpoint endpoint, std::size_t dimension);

    const std::string& provider_id() const override { return id_; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

private:
    RemoteEndpoint endpoint_;
    std::size_t dimension_;
    std::string id_;
    RateLimiter limiter_;
};

/// POST {"model","messages",...decoding} -> choices[0].message.content.
class RemoteChatClient final : public ChatClient {
public:
    RemoteChatClient(RemoteEndpoint endpoint, DecodingParams decoding = {});

    const std::string& client_id() const override { return id_; }
    const DecodingParams& decoding() const override { return decoding_; }
    std::string complete(const ChatRequest& request) override;

private:
    RemoteEndpoint endpoint_;
    DecodingParams decoding_;
    std::string id_;
    RateLimiter limiter_;
};

/// Offline deterministic model double for end-to-end runs without any
/// HTTP provider. Generation prompts are answered by echoing the question
/// and citing every numbered reference; verification prompts pass all
/// checks; judge prompts score full marks. Pure function of the prompt.
class MockChatClient final : public ChatClient {
public:
    explicit MockChatClient(DecodingParams decoding = {});

    const std::string& client_id() const override { return id_; }
    const DecodingParams& decoding() const override { return decoding_; }
    std::string complete(const ChatRequest& request) override;

private:
    DecodingParams decoding_;
    std::string id_;
};

/// POST {"model","query","documents"} -> {"results":[{"index","relevance_score"}]}.
class RemoteReranker final : public Reranker {
public:
    explicit RemoteReranker(RemoteEndpoint endpoint);

    const std::string& reranker_id() const override { return id_; }
    std::vector<double> score(const std::string& query,
                              std::span<const std::string> documents) override;

private:
    RemoteEndpoint endpoint_;
    std::string id_;
    RateLimiter limiter_;
};

} // namespace legrag
