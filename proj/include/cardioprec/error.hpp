#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cardioprec {

enum class ErrorCode {
    MalformedHeader,
    LengthMismatch,
    NonPositiveSpacing,
    UnsupportedDataType,
    InvalidLabel,
    MissingFile,
    InvalidManifest,
    MissingScan,
    SampleCountMismatch,
    UnknownLabel,
    MalformedCsv,
    DimensionMismatch,
    DegenerateVolume,
    InsufficientSamples,
    InvalidArgument,
    ShapeExceedsGrid,
    ZeroPairMean,
    KeyMismatch,
    EmptyDataset,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::LengthMismatch: return "dimension/length mismatch";
    case ErrorCode::NonPositiveSpacing: return "non-positive spacing";
    case ErrorCode::UnsupportedDataType: return "unsupported data type";
    case ErrorCode::InvalidLabel: return "invalid label";
    case ErrorCode::MissingFile: return "missing file";
    case ErrorCode::InvalidManifest: return "invalid manifest";
    case ErrorCode::MissingScan: return "missing scan";
    case ErrorCode::SampleCountMismatch: return "sample count mismatch";
    case ErrorCode::UnknownLabel: return "unknown label";
    case ErrorCode::MalformedCsv: return "malformed csv";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::DegenerateVolume: return "degenerate volume";
    case ErrorCode::InsufficientSamples: return "insufficient samples";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ShapeExceedsGrid: return "shape exceeds grid";
    case ErrorCode::ZeroPairMean: return "zero pair mean";
    case ErrorCode::KeyMismatch: return "key mismatch";
    case ErrorCode::EmptyDataset: return "empty dataset";
    case ErrorCode::Io: return "i/o failure";
    }
    return "unknown error";
}

/// Every failure the library reports. `code()` identifies the class of
/// problem; the message names the offending field or context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Input problems (as opposed to I/O or internal failures).
    bool is_validation() const noexcept { return code_ != ErrorCode::Io; }

    /// Same error with additional leading context, e.g. the subject id.
    Error with_context(const std::string& context) const {
        Error e(*this);
        e.context_ = context + ": " + e.context_;
        return e;
    }

    const char* what() const noexcept override {
        if (context_.empty()) return std::runtime_error::what();
        full_ = context_ + std::runtime_error::what();
        return full_.c_str();
    }

private:
    ErrorCode code_;
    std::string context_;
    mutable std::string full_;
};

}  // namespace cardioprec
