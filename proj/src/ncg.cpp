#include "tj/ncg.hpp"

namespace tj {

std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged:
      return "CONVERGED";
    case SolverStatus::NonConverged:
      return "NON_CONVERGED";
    case SolverStatus::NanDetected:
      return "NAN_DETECTED";
  }
  return "UNKNOWN";
}

}  // namespace tj
