#pragma once

#include <stdexcept>
#include <string>

namespace qvdp {

enum class ErrorKind {
  InvalidDimension,
  Layout,
  InvalidState,
  InvalidArgument,
  IntegratorAccuracy,
  NonConvergence,
  InvalidKind,
  IncompleteSchedule,
  InvalidDistribution,
  UnboundedAmplitude,
  Precondition,
  Instability,
  Range,
  Config,
  Io,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::Layout: return "layout";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::IntegratorAccuracy: return "integrator-accuracy";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::InvalidKind: return "invalid-kind";
    case ErrorKind::IncompleteSchedule: return "incomplete-schedule";
    case ErrorKind::InvalidDistribution: return "invalid-distribution";
    case ErrorKind::UnboundedAmplitude: return "unbounded-amplitude";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Range: return "range";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qvdp
