#include "legrag/errors.hpp"

namespace legrag {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::malformed_record: return "MalformedRecord";
        case Errc::duplicate_doc_id: return "DuplicateDocId";
        case Errc::unknown_question_type: return "UnknownQuestionType";
        case Errc::dangling_doc_reference: return "DanglingDocReference";
        case Errc::empty_dataset: return "EmptyDataset";
        case Errc::provider_unreachable: return "ProviderUnreachable";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::duplicate_segment_id: return "DuplicateSegmentId";
        case Errc::format_version_mismatch: return "FormatVersionMismatch";
        case Errc::corrupt_index: return "CorruptIndex";
        case Errc::reranker_unreachable: return "RerankerUnreachable";
        case Errc::client_unreachable: return "ClientUnreachable";
        case Errc::empty_completion: return "EmptyCompletion";
        case Errc::empty_evidence: return "EmptyEvidence";
        case Errc::gold_unresolvable: return "GoldUnresolvable";
        case Errc::alignment_mismatch: return "AlignmentMismatch";
        case Errc::dsa_undefined: return "DsaUndefined";
        case Errc::degenerate_labels: return "DegenerateLabels";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::zero_variance: return "ZeroVariance";
        case Errc::no_json_found: return "NoJsonFound";
        case Errc::dimension_out_of_bounds: return "DimensionOutOfBounds";
        case Errc::non_numeric_score: return "NonNumericScore";
        case Errc::missing_field: return "MissingField";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::io_error: return "IoError";
    }
    return "Error";
}

} // namespace legrag
