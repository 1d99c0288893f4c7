#include "core/errors.hpp"

namespace archbench {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::UnknownModule: return "UnknownModule";
        case ErrorCode::BadFromIndex: return "BadFromIndex";
        case ErrorCode::UnknownScale: return "UnknownScale";
        case ErrorCode::DegenerateShape: return "DegenerateShape";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::ChannelMismatch: return "ChannelMismatch";
        case ErrorCode::IndivisibleChannels: return "IndivisibleChannels";
        case ErrorCode::UnknownBackbone: return "UnknownBackbone";
        case ErrorCode::UnknownTap: return "UnknownTap";
        case ErrorCode::ShapeConflict: return "ShapeConflict";
        case ErrorCode::MissingDetect: return "MissingDetect";
        case ErrorCode::MultipleDetect: return "MultipleDetect";
        case ErrorCode::MalformedXml: return "MalformedXml";
        case ErrorCode::MissingGeometry: return "MissingGeometry";
        case ErrorCode::BadOccupiedFlag: return "BadOccupiedFlag";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::DenormalizedInput: return "DenormalizedInput";
        case ErrorCode::BadFieldCount: return "BadFieldCount";
        case ErrorCode::NonNumericField: return "NonNumericField";
        case ErrorCode::RangeViolation: return "RangeViolation";
        case ErrorCode::BadRatios: return "BadRatios";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::NoGroundTruth: return "NoGroundTruth";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    }
    return "Unknown";
}

} // namespace archbench
