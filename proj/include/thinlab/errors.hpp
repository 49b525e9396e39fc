#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thinlab {

enum class ErrorKind {
  NonSymmetric,
  EllipticityViolated,
  NotSPD,
  DegenerateBasis,
  ZeroVector,
  OutOfDomain,
  EllipsoidExceedsDomain,
  TooManyThinNodes,
  NoFeasibleActiveSet,
  ZeroReplacementEnergy,
  UnknownKind,
  CenterNotOnThinPlane,
  ZeroEvenEnergy,
  VanishingBoundaryMass,
  RadiusBeyondTruncationDomain,
  InsufficientSamples,
  RadiusBelowResolution,
  DegenerateFit,
  NonnegativityViolated,
  TooFewPoints,
  InvalidArgument,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace thinlab
