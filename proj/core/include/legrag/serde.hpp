#pragma once

#include <json.hpp>

#include "legrag/index.hpp"
#include "legrag/splitter.hpp"

namespace legrag {

/// {"segment_id","doc_id","granularity","article_label"?,"text","span":[s,e]}
nlohmann::json segment_to_json(const Segment& s);
Segment segment_from_json(const nlohmann::json& j);

nlohmann::json scored_segment_to_json(const ScoredSegment& s);

} // namespace legrag
