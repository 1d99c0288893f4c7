#pragma once

#include <stdexcept>
#include <string>

namespace archbench {

// Error taxonomy shared by the whole library. Codes are stable: the C API
// exposes them verbatim, so renumbering is a breaking change.
enum class ErrorCode {
    Ok = 0,
    // config
    MalformedDocument = 1,
    MissingField = 2,
    UnknownModule = 3,
    BadFromIndex = 4,
    UnknownScale = 5,
    // catalog
    DegenerateShape = 10,
    ArityMismatch = 11,
    ChannelMismatch = 12,
    IndivisibleChannels = 13,
    UnknownBackbone = 14,
    UnknownTap = 15,
    // graph
    ShapeConflict = 20,
    MissingDetect = 21,
    MultipleDetect = 22,
    // annot
    MalformedXml = 30,
    MissingGeometry = 31,
    BadOccupiedFlag = 32,
    OutOfBounds = 33,
    DenormalizedInput = 34,
    BadFieldCount = 35,
    NonNumericField = 36,
    RangeViolation = 37,
    BadRatios = 38,
    // metrics
    EmptyClass = 40,
    NoGroundTruth = 41,
    // io / misc
    IoFailure = 50,
    SchemaMismatch = 51,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

} // namespace archbench
