#include "kanids/error.hpp"

namespace kanids {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidBounds: return "invalid-bounds";
        case ErrorKind::InvalidSize: return "invalid-size";
        case ErrorKind::NonFiniteInput: return "non-finite-input";
        case ErrorKind::ShapeMismatch: return "shape-mismatch";
        case ErrorKind::NoCachedForward: return "no-cached-forward";
        case ErrorKind::KernelLargerThanInput: return "kernel-larger-than-input";
        case ErrorKind::EmptySequence: return "empty-sequence";
        case ErrorKind::IndexOutOfRange: return "index-out-of-range";
        case ErrorKind::UnsupportedKind: return "unsupported-kind";
        case ErrorKind::NonFiniteLogit: return "non-finite-logit";
        case ErrorKind::LengthMismatch: return "length-mismatch";
        case ErrorKind::EmptyBatch: return "empty-batch";
        case ErrorKind::NonFiniteGradient: return "non-finite-gradient";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::SchemaMismatch: return "schema-mismatch";
        case ErrorKind::MissingFile: return "missing-file";
        case ErrorKind::EmptyFile: return "empty-file";
        case ErrorKind::SingleClassDataset: return "single-class-dataset";
        case ErrorKind::AliasMapIncomplete: return "alias-map-incomplete";
        case ErrorKind::EmptyConfusion: return "empty-confusion";
        case ErrorKind::DuplicateRunId: return "duplicate-run-id";
        case ErrorKind::IoFailure: return "io-failure";
        case ErrorKind::ConfigParse: return "config-parse-error";
    }
    return "unknown";
}

}  // namespace kanids
