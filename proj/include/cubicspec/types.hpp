#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cubicspec {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline const cplx iu{0.0, 1.0};

// Failure taxonomy shared by all modules. Codes are stable strings so the CLI
// can emit them verbatim in machine-readable error JSON.
enum class Err {
  bad_potential_format,
  missing_sampler,
  non_convergent,
  lambda_on_spectrum,
  secular_zero,
  sign_error,
  case_mismatch,
  g_floor_violation,
  inconsistent_modulus,
  not_a_root,
  not_a_secular_root,
  pole_at_k,
  bracket_failure,
  invalid_branch,
  on_pole,
  grid_too_coarse,
  eigensolve_failure,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::bad_potential_format: return "BadPotentialFormat";
    case Err::missing_sampler:      return "MissingSampler";
    case Err::non_convergent:       return "NonConvergent";
    case Err::lambda_on_spectrum:   return "LambdaOnSpectrum";
    case Err::secular_zero:         return "SecularZero";
    case Err::sign_error:           return "SignError";
    case Err::case_mismatch:        return "CaseMismatch";
    case Err::g_floor_violation:    return "GFloorViolation";
    case Err::inconsistent_modulus: return "InconsistentModulus";
    case Err::not_a_root:           return "NotARoot";
    case Err::not_a_secular_root:   return "NotASecularRoot";
    case Err::pole_at_k:            return "PoleAtK";
    case Err::bracket_failure:      return "BracketFailure";
    case Err::invalid_branch:       return "InvalidBranch";
    case Err::on_pole:              return "OnPole";
    case Err::grid_too_coarse:      return "GridTooCoarse";
    case Err::eigensolve_failure:   return "EigensolveFailure";
  }
  return "Unknown";
}

class Failure : public std::runtime_error {
 public:
  Failure(Err code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }
  const char* code_name() const { return err_name(code_); }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
  throw Failure(code, msg);
}

}  // namespace cubicspec
