#include "hsearch/error.hpp"

namespace hsearch {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRecord: return "malformed_record";
        case ErrorCode::DuplicateDocId: return "duplicate_doc_id";
        case ErrorCode::EmptyCorpus: return "empty_corpus";
        case ErrorCode::UnknownDocId: return "unknown_doc_id";
        case ErrorCode::OffsetOutOfBounds: return "offset_out_of_bounds";
        case ErrorCode::UnknownCategory: return "unknown_category";
        case ErrorCode::OverlapConflict: return "overlap_conflict";
        case ErrorCode::GazetteerConflict: return "gazetteer_conflict";
        case ErrorCode::EmptySubset: return "empty_subset";
        case ErrorCode::EmptyVocabulary: return "empty_vocabulary";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::MalformedModelFile: return "malformed_model_file";
        case ErrorCode::UnknownClusterId: return "unknown_cluster_id";
        case ErrorCode::UnknownDoc: return "unknown_doc";
        case ErrorCode::InvalidPage: return "invalid_page";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::IoError: return "io_error";
        case ErrorCode::DegenerateAgreement: return "degenerate_agreement";
        case ErrorCode::DomainMismatch: return "domain_mismatch";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::EmptyIntersection: return "empty_intersection";
        case ErrorCode::IncompatibleSnapshot: return "incompatible_snapshot";
    }
    return "unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message, std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) {
        out += " at line " + std::to_string(*line);
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)), code_(code), message_(message), line_(line) {}

}  // namespace hsearch
