#include "thinlab/errors.hpp"

namespace thinlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::EllipticityViolated: return "EllipticityViolated";
    case ErrorKind::NotSPD: return "NotSPD";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::EllipsoidExceedsDomain: return "EllipsoidExceedsDomain";
    case ErrorKind::TooManyThinNodes: return "TooManyThinNodes";
    case ErrorKind::NoFeasibleActiveSet: return "NoFeasibleActiveSet";
    case ErrorKind::ZeroReplacementEnergy: return "ZeroReplacementEnergy";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::CenterNotOnThinPlane: return "CenterNotOnThinPlane";
    case ErrorKind::ZeroEvenEnergy: return "ZeroEvenEnergy";
    case ErrorKind::VanishingBoundaryMass: return "VanishingBoundaryMass";
    case ErrorKind::RadiusBeyondTruncationDomain: return "RadiusBeyondTruncationDomain";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::RadiusBelowResolution: return "RadiusBelowResolution";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::NonnegativityViolated: return "NonnegativityViolated";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace thinlab
