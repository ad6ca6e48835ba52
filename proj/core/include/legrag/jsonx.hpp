#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

namespace legrag {

/// Finds the first parseable JSON object (or array, when allowed) embedded
/// in free-form model output, tolerating surrounding prose and code fences.
inline std::optional<nlohmann::json> find_first_json(std::string_view reply,
                                                     bool allow_array = false) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char open = reply[i];
        if (open != '{' && !(allow_array && open == '[')) continue;
        const char close = open == '{' ? '}' : ']';
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t j = i; j < reply.size(); ++j) {
            const char c = reply[j];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                --depth;
                if (depth == 0) {
                    auto parsed = nlohmann::json::parse(reply.substr(i, j - i + 1),
                                                        nullptr, false);
                    if (!parsed.is_discarded()) return parsed;
                    break; // balanced but unparseable; try the next opener
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace legrag
