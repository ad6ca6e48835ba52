#include "legrag/providers.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "legrag/errors.hpp"
#include "legrag/hashing.hpp"

namespace legrag {

using nlohmann::json;

namespace {

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

/// POSTs JSON with bounded retries; throws `errc` when every attempt fails.
json post_json(const RemoteEndpoint& ep, RateLimiter& limiter, const json& body, Errc errc) {
    std::string last_error = "no attempts made";
    const int attempts = std::max(1, ep.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(ep.backoff_base * (1 << (attempt - 1)));
        }
        limiter.acquire();
        httplib::Client client(ep.base_url);
        client.set_connection_timeout(ep.timeout_seconds);
        client.set_read_timeout(ep.timeout_seconds);
        httplib::Headers headers;
        if (!ep.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + ep.api_key);
        }
        auto res = client.Post(ep.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            if (retryable_status(res->status)) continue;
            raise(errc, ep.base_url + ep.path + ": " + last_error);
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) {
            last_error = "response is not JSON";
            continue;
        }
        return parsed;
    }
    raise(errc, ep.base_url + ep.path + ": " + last_error + " after " +
                    std::to_string(attempts) + " attempts");
}

} // namespace

// ---------------------------------------------------------------------------
// embeddings
// ---------------------------------------------------------------------------

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)),
      dimension_(dimension),
      id_("remote-embedding:" + endpoint_.model),
      limiter_(endpoint_.min_interval) {
    if (dimension_ == 0) raise(Errc::invalid_config, "embedding dimension must be positive");
}

std::vector<std::vector<float>> RemoteEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) {
    json input = json::array();
    for (const auto& t : texts) input.push_back(t);
    const json body{{"model", endpoint_.model}, {"input", std::move(input)}};
    const json reply = post_json(endpoint_, limiter_, body, Errc::provider_unreachable);

    if (!reply.contains("data") || !reply["data"].is_array()) {
        raise(Errc::provider_unreachable, "embeddings response missing data array");
    }
    std::vector<std::vector<float>> out;
    out.reserve(reply["data"].size());
    for (const auto& item : reply["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array()) {
            raise(Errc::provider_unreachable, "embeddings response item missing embedding");
        }
        out.push_back(item["embedding"].get<std::vector<float>>());
    }
    return out;
}

// ---------------------------------------------------------------------------
// chat completions
// ---------------------------------------------------------------------------

RemoteChatClient::RemoteChatClient(RemoteEndpoint endpoint, DecodingParams decoding)
    : endpoint_(std::move(endpoint)),
      decoding_(decoding),
      id_("remote-chat:" + endpoint_.model),
      limiter_(endpoint_.min_interval) {}

std::string RemoteChatClient::complete(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    const json body{{"model", endpoint_.model},
                    {"messages", std::move(messages)},
                    {"temperature", request.decoding.temperature},
                    {"top_p", request.decoding.top_p},
                    {"max_tokens", request.decoding.max_tokens}};
    const json reply = post_json(endpoint_, limiter_, body, Errc::client_unreachable);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        raise(Errc::client_unreachable, "chat response missing choices[0].message.content");
    }
}

// ---------------------------------------------------------------------------
// rerank
// ---------------------------------------------------------------------------

RemoteReranker::RemoteReranker(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      id_("remote-rerank:" + endpoint_.model),
      limiter_(endpoint_.min_interval) {}

std::vector<double> RemoteReranker::score(const std::string& query,
                                          std::span<const std::string> documents) {
    json docs = json::array();
    for (const auto& d : documents) docs.push_back(d);
    const json body{{"model", endpoint_.model}, {"query", query}, {"documents", std::move(docs)}};
    const json reply = post_json(endpoint_, limiter_, body, Errc::reranker_unreachable);

    if (!reply.contains("results") || !reply["results"].is_array()) {
        raise(Errc::reranker_unreachable, "rerank response missing results array");
    }
    std::vector<double> scores(documents.size(),
                               -std::numeric_limits<double>::infinity());
    for (const auto& r : reply["results"]) {
        if (!r.contains("index") || !r.contains("relevance_score")) {
            raise(Errc::reranker_unreachable, "rerank result missing index/relevance_score");
        }
        const auto idx = r["index"].get<std::size_t>();
        if (idx >= scores.size()) {
            raise(Errc::reranker_unreachable, "rerank result index out of range");
        }
        scores[idx] = r["relevance_score"].get<double>();
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            raise(Errc::reranker_unreachable, "rerank response left a document unscored");
        }
    }
    return scores;
}

// ---------------------------------------------------------------------------
// offline mock
// ---------------------------------------------------------------------------

MockChatClient::MockChatClient(DecodingParams decoding)
    : decoding_(decoding), id_("mock-chat") {}

std::string MockChatClient::complete(const ChatRequest& request) {
    const std::string& prompt =
        request.messages.empty() ? std::string{} : request.messages.back().content;

    if (prompt.find("\"grounding\"") != std::string::npos) {
        return R"({"grounding": true, "consistency": true, "completeness": true, "missing_points": ""})";
    }
    if (prompt.find("relevance_score") != std::string::npos) {
        return R"({"relevance_score": 30, "accuracy_score": 40, "completeness_score": 20, "fluency_score": 10})";
    }

    // answer-generation shape: echo the [question] section, cite everything
    std::string question = prompt;
    const std::size_t q_pos = prompt.find("[question]\n");
    if (q_pos != std::string::npos) {
        const std::size_t start = q_pos + 11;
        const std::size_t end = prompt.find("\n[related documents]", start);
        question = prompt.substr(start, end == std::string::npos ? std::string::npos
                                                                 : end - start);
    }
    std::string citations;
    for (std::size_t i = 1; i <= 64; ++i) {
        const std::string marker = "[" + std::to_string(i) + "] ";
        if (prompt.find(marker) == std::string::npos) break;
        if (!citations.empty()) citations += ' ';
        citations += "[" + std::to_string(i) + "]";
    }
    if (citations.empty()) citations = "[1]";
    return "[related documents]\n" + citations + "\n[answer]\n" + question;
}

// ---------------------------------------------------------------------------
// scripted chat client
// ---------------------------------------------------------------------------

std::string chat_request_digest(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return hashing::sha256_hex(messages.dump());
}

ScriptedChatClient::ScriptedChatClient(Responder responder, DecodingParams decoding,
                                       std::string id)
    : responder_(std::move(responder)), decoding_(decoding), id_(std::move(id)) {}

ScriptedChatClient ScriptedChatClient::fifo(std::vector<std::string> replies,
                                            DecodingParams decoding) {
    auto shared = std::make_shared<std::pair<std::vector<std::string>, std::size_t>>(
        std::move(replies), 0);
    return ScriptedChatClient(
        [shared](const ChatRequest&, std::size_t) {
            if (shared->first.empty()) return std::string{};
            const std::size_t i = std::min(shared->second, shared->first.size() - 1);
            ++shared->second;
            return shared->first[i];
        },
        decoding, "scripted-chat-fifo");
}

std::string ScriptedChatClient::complete(const ChatRequest& request) {
    std::size_t call_index = 0;
    {
        std::lock_guard lock(mutex_);
        call_index = per_digest_calls_[chat_request_digest(request)]++;
        ++total_calls_;
    }
    return responder_(request, call_index);
}

std::size_t ScriptedChatClient::calls() const {
    std::lock_guard lock(mutex_);
    return total_calls_;
}

} // namespace legrag
