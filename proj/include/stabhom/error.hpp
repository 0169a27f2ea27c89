#pragma once

#include <stdexcept>
#include <string>

namespace stabhom {

/// Failure categories raised by library operations. Certificate failures are
/// verdicts and never show up here.
enum class ErrorKind {
  DimensionMismatch,
  UndefinedAtPoint,
  NotInvertible,
  QuadratureFailure,
  BlowUp,
  StepUnderflow,
  GradientVanished,
  StarShapeViolated,
  DegenerateJacobian,
  NotHurwitz,
  SingularSystem,
  EigenFailure,
  VanishesOnCircle,
  NotSPD,
  EndpointMismatch,
  SpuriousCriticalPoint,
  CertificationFailed,
  UnboundedSup,
  AtProjectionPole,
  NearProjectionPole,
  UnsupportedDimension,
  UnknownExample,
  InvalidArgument,
};

[[nodiscard]] inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UndefinedAtPoint: return "UndefinedAtPoint";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::GradientVanished: return "GradientVanished";
    case ErrorKind::StarShapeViolated: return "StarShapeViolated";
    case ErrorKind::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorKind::NotHurwitz: return "NotHurwitz";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::VanishesOnCircle: return "VanishesOnCircle";
    case ErrorKind::NotSPD: return "NotSPD";
    case ErrorKind::EndpointMismatch: return "EndpointMismatch";
    case ErrorKind::SpuriousCriticalPoint: return "SpuriousCriticalPoint";
    case ErrorKind::CertificationFailed: return "CertificationFailed";
    case ErrorKind::UnboundedSup: return "UnboundedSup";
    case ErrorKind::AtProjectionPole: return "AtProjectionPole";
    case ErrorKind::NearProjectionPole: return "NearProjectionPole";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::UnknownExample: return "UnknownExample";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stabhom
