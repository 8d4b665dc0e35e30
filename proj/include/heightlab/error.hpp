#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heightlab {

enum class ErrorKind {
  EmptyDiscretization,
  DisconnectedDiscretization,
  PointOutsideDomain,
  InvalidDomain,
  InvalidHeightFunction,
  UnsupportedProfile,
  DomainNotCellCovered,
  NotExtendable,
  EmptyCarrier,
  InstanceTooLarge,
  UnsatisfiableParity,
  UnboundedInstance,
  EmptySet,
  NoSimplexFits,
  Disconnected,
  MeshOutsideDomain,
  SlopeOutOfRange,
  InfeasibleBoundary,
  UnsupportedDimension,
  CorruptTable,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDiscretization: return "EmptyDiscretization";
    case ErrorKind::DisconnectedDiscretization: return "DisconnectedDiscretization";
    case ErrorKind::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::InvalidHeightFunction: return "InvalidHeightFunction";
    case ErrorKind::UnsupportedProfile: return "UnsupportedProfile";
    case ErrorKind::DomainNotCellCovered: return "DomainNotCellCovered";
    case ErrorKind::NotExtendable: return "NotExtendable";
    case ErrorKind::EmptyCarrier: return "EmptyCarrier";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::UnsatisfiableParity: return "UnsatisfiableParity";
    case ErrorKind::UnboundedInstance: return "UnboundedInstance";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NoSimplexFits: return "NoSimplexFits";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::MeshOutsideDomain: return "MeshOutsideDomain";
    case ErrorKind::SlopeOutOfRange: return "SlopeOutOfRange";
    case ErrorKind::InfeasibleBoundary: return "InfeasibleBoundary";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::CorruptTable: return "CorruptTable";
  }
  return "Unknown";
}

/// Domain error raised by every module; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace heightlab
