#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hfnet {

enum class ErrorCode {
  InvalidModel,
  InvalidGrid,
  Parse,
  Io,
  UnknownDomain,
  UnsupportedJunctionTopology,
  AcrossSourceLoop,
  ThroughSourceCutset,
  DependentStorage,
  SingularAlgebraicSystem,
  UnsupportedDerivativeFeedthrough,
  RankDeficient,
  DimensionMismatch,
  Underdetermined,
  Inconsistent,
  LabelMismatch,
  SingularA,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::UnsupportedJunctionTopology: return "UnsupportedJunctionTopology";
    case ErrorCode::AcrossSourceLoop: return "AcrossSourceLoop";
    case ErrorCode::ThroughSourceCutset: return "ThroughSourceCutset";
    case ErrorCode::DependentStorage: return "DependentStorage";
    case ErrorCode::SingularAlgebraicSystem: return "SingularAlgebraicSystem";
    case ErrorCode::UnsupportedDerivativeFeedthrough: return "UnsupportedDerivativeFeedthrough";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::SingularA: return "SingularA";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code and,
/// where meaningful, the ids (elements, nodes, variables, row tags) involved.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> subjects = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subjects_(std::move(subjects)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }

 private:
  ErrorCode code_;
  std::vector<std::string> subjects_;
};

namespace detail {
inline std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}
}  // namespace detail

}  // namespace hfnet
