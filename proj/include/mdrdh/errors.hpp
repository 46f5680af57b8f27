#pragma once

#include <stdexcept>
#include <string>

namespace mdrdh {

enum class Err {
    NotBaseline,
    NotGrayscale,
    RestartIntervalsPresent,
    ArithmeticCoding,
    TruncatedStream,
    InvalidMarker,
    NotFullTable,
    NonStandardTable,
    KraftViolation,
    InvalidCode,
    BlockOverflow,
    UnmappableSymbol,
    ZeroCoefficient,
    MissingSymbol,
    InsufficientCapacity,
    CapacityExceeded,
    PayloadUnderrun,
    PayloadOverflow,
    NoZeroPoint,
    NoFeasiblePeak,
    NoDuplicate,
    MultipleDuplicates,
    InsufficientTotalCapacity,
    NotMarked,
    IntegrityFailure,
    CapacityError,
    DimensionMismatch,
    IoError,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& detail = "")
        : std::runtime_error(detail.empty() ? std::string(err_name(code))
                                            : std::string(err_name(code)) + ": " + detail),
          code_(code) {}

    Err code() const { return code_; }
    const char* name() const { return err_name(code_); }

private:
    Err code_;
};

} // namespace mdrdh
