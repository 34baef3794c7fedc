#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exlab {

enum class ErrorKind {
  InvalidDynamics,
  InvalidExogenous,
  NonStochasticRow,
  EmissionNotClosed,
  InitialOffSupport,
  SchemaError,
  NotIrreducible,
  OpenComponent,
  UnknownEntry,
  BadParams,
  RequirementUnsatisfiable,
  LengthTooShort,
  TooFewTrajectories,
  KMaxTooLarge,
  TooManyObservations,
  TooLarge,
  ConfigMismatch,
  EmptyStream,
  InvalidEncoder,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDynamics: return "InvalidDynamics";
    case ErrorKind::InvalidExogenous: return "InvalidExogenous";
    case ErrorKind::NonStochasticRow: return "NonStochasticRow";
    case ErrorKind::EmissionNotClosed: return "EmissionNotClosed";
    case ErrorKind::InitialOffSupport: return "InitialOffSupport";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::OpenComponent: return "OpenComponent";
    case ErrorKind::UnknownEntry: return "UnknownEntry";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::RequirementUnsatisfiable: return "RequirementUnsatisfiable";
    case ErrorKind::LengthTooShort: return "LengthTooShort";
    case ErrorKind::TooFewTrajectories: return "TooFewTrajectories";
    case ErrorKind::KMaxTooLarge: return "KMaxTooLarge";
    case ErrorKind::TooManyObservations: return "TooManyObservations";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::InvalidEncoder: return "InvalidEncoder";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` identifies the failure class,
/// `what()` carries the human-readable detail (offending indices, field paths).
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace exlab
