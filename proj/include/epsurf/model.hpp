#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace epsurf {

using cplx = std::complex<double>;

/// Thrown when a parameter set or configuration violates its invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation is called outside the parameter region it is
/// derived for (e.g. the reduced cubic off the pseudo-Hermitian manifold).
class PreconditionViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/**
 * Physical parameters of three circularly coupled cavities.
 *
 * kappa > 0 is loss, kappa < 0 is gain. All quantities share one unit
 * (hbar = 1). Cavity 2 is lossy and couplings are non-negative.
 */
struct SystemParams {
  double omega1{0.0}, omega2{0.0}, omega3{0.0};
  double kappa1{0.0}, kappa2{1.0}, kappa3{0.0};
  double g12{0.0}, g13{0.0}, g23{0.0};

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Dense 3x3 complex matrix, row-major.
struct ComplexMatrix3 {
  std::array<std::array<cplx, 3>, 3> entries{};

  cplx& operator()(int i, int j) { return entries[i][j]; }
  const cplx& operator()(int i, int j) const { return entries[i][j]; }

  cplx trace() const { return entries[0][0] + entries[1][1] + entries[2][2]; }
};

struct Detunings {
  double delta1;
  double delta2;
};

/// Throws ValidationError unless all fields are finite, couplings are
/// non-negative and kappa2 > 0.
void validate(const SystemParams& p);

/// Non-Hermitian matrix with diagonal omega_n - i kappa_n and real
/// symmetric couplings.
ComplexMatrix3 build_matrix(const SystemParams& p);

/// (omega1 - omega3, omega2 - omega3).
Detunings detunings(const SystemParams& p);

/// Rescales by kappa2 and shifts frequencies so that omega3 = 0.
/// Eigenvalues map as lambda -> (lambda - omega3) / kappa2.
SystemParams normalize(const SystemParams& p);

/// Builds a full parameter set from detunings relative to a reference
/// frequency omega3.
SystemParams with_detunings(SystemParams p, double delta1, double delta2);

std::string to_string(const SystemParams& p);

}  // namespace epsurf
