#include "stadloc/error.hpp"

namespace stadloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Grazing: return "Grazing";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateShape: return "DegenerateShape";
    case ErrorCode::NotSaturated: return "NotSaturated";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::WindowTooWide: return "WindowTooWide";
    case ErrorCode::PointOnBoundary: return "PointOnBoundary";
    case ErrorCode::EmptyBoundaryFunction: return "EmptyBoundaryFunction";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::SampleExceedsA0: return "SampleExceedsA0";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::SampleAtBoundary: return "SampleAtBoundary";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace stadloc
