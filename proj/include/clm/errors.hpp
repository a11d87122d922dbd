#pragma once

#include <stdexcept>
#include <string>

namespace clm {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};
struct ConvergenceFailure : Error {
  explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};
struct InvalidRho : Error {
  explicit InvalidRho(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct ImageTooSmall : Error {
  explicit ImageTooSmall(const std::string& msg) : Error(msg) {}
};
struct TooFewSamples : Error {
  explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};
struct ParamMismatch : Error {
  explicit ParamMismatch(const std::string& msg) : Error(msg) {}
};
struct RegionTooSmall : Error {
  explicit RegionTooSmall(const std::string& msg) : Error(msg) {}
};
struct EmptyRegion : Error {
  explicit EmptyRegion(const std::string& msg) : Error(msg) {}
};
struct RankTooLarge : Error {
  explicit RankTooLarge(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error(msg) {}
};
struct EmptyDataset : Error {
  explicit EmptyDataset(const std::string& msg) : Error(msg) {}
};
struct UnreadableImage : Error {
  explicit UnreadableImage(const std::string& msg) : Error(msg) {}
};
struct InsufficientSamples : Error {
  explicit InsufficientSamples(const std::string& msg) : Error(msg) {}
};

}  // namespace clm
