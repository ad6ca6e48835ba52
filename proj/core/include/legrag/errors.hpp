#pragma once

#include <stdexcept>
#include <string>

namespace legrag {

enum class Errc {
    malformed_record,
    duplicate_doc_id,
    unknown_question_type,
    dangling_doc_reference,
    empty_dataset,
    provider_unreachable,
    dimension_mismatch,
    duplicate_segment_id,
    format_version_mismatch,
    corrupt_index,
    reranker_unreachable,
    client_unreachable,
    empty_completion,
    empty_evidence,
    gold_unresolvable,
    alignment_mismatch,
    dsa_undefined,
    degenerate_labels,
    length_mismatch,
    zero_variance,
    no_json_found,
    dimension_out_of_bounds,
    non_numeric_score,
    missing_field,
    invalid_config,
    io_error,
};

const char* errc_name(Errc code) noexcept;

/// Carries a machine-checkable error code alongside the human-readable message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace legrag
