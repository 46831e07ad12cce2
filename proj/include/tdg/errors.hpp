#pragma once

#include <stdexcept>
#include <string>

namespace tdg {

/// Failure modes surfaced by the implicit solvers and linear algebra kernels.
enum class SolverFailure {
  NewtonDiverged,
  SingularSystem,
  LocalSolverSingular,
  GmresStalled,
};

inline const char* to_string(SolverFailure f) {
  switch (f) {
    case SolverFailure::NewtonDiverged: return "NewtonDiverged";
    case SolverFailure::SingularSystem: return "SingularSystem";
    case SolverFailure::LocalSolverSingular: return "LocalSolverSingular";
    case SolverFailure::GmresStalled: return "GmresStalled";
  }
  return "Unknown";
}

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverFailure kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  SolverFailure kind() const { return kind_; }

 private:
  SolverFailure kind_;
};

}  // namespace tdg
