#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epsurf/model.hpp"
#include "epsurf/pseudoherm.hpp"

namespace epsurf {

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Real cubic a x^3 + b x^2 + c x + d with a = 1, x = lambda - omega3.
struct CubicCoeffs {
  double a{1.0}, b{0.0}, c{0.0}, d{0.0};

  double scale() const;  ///< max(1, |b|, |c|, |d|)
};

/// Monic complex cubic x^3 + c2 x^2 + c1 x + c0.
struct ComplexCubic {
  cplx c2, c1, c0;
};

struct DiscriminantSet {
  double A, B, C, Delta;
};

enum class Classification {
  ThreeRealDistinct,
  OneRealPlusConjugatePair,
  EP2,
  EP3,
  NonPseudoHermitian,
};

std::string_view to_string(Classification c);

/// Three eigenvalue branches. lambda0 is the real root when a conjugate
/// pair is present, and the middle root when all three are real.
struct EigenTriple {
  cplx lambda_plus, lambda_minus, lambda_zero;
  Classification classification{Classification::ThreeRealDistinct};

  std::array<cplx, 3> values() const { return {lambda_plus, lambda_minus, lambda_zero}; }
  EigenTriple shifted(cplx offset, double scale = 1.0) const;
};

/// det(lambda I - H) as a monic cubic in lambda.
ComplexCubic char_poly_general(const ComplexMatrix3& h);

/// Real coefficients of the secular cubic in x = lambda - omega3.
/// Throws PreconditionViolated unless p is pseudo-Hermitian within 1e-9.
CubicCoeffs cubic_coeffs_reduced(const SystemParams& p);

DiscriminantSet discriminants(const CubicCoeffs& c);

/// Default classification band: 1e-8 * coefficient scale.
double default_tolerance(const CubicCoeffs& c);

/// Closed-form roots with one Newton polish per root.
EigenTriple solve_cubic(const CubicCoeffs& c, std::optional<double> tol = std::nullopt);

/// Closed-form roots of a complex cubic (Cardano in complex arithmetic).
/// Classification is NonPseudoHermitian.
EigenTriple solve_cubic_complex(const ComplexCubic& c);

/// Eigenvalues by an iterative QR eigensolver, independent of the cubic
/// formulas. Sorted by (real, imag). Throws NonConvergence.
std::array<cplx, 3> eigensolve_oracle(const ComplexMatrix3& h);

/// Eigenvalues of the full system (absolute lambda, units of p). Uses the
/// reduced real cubic when p is pseudo-Hermitian, the complex cubic
/// otherwise.
EigenTriple eigenvalues(const SystemParams& p);

/// Largest distance between two eigenvalue multisets under the best pairing.
double multiset_distance(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b);

enum class Axis { Omega1, Omega2, Omega3, Kappa1, Kappa2, Kappa3, G12, G13, G23, Delta1, Delta2 };

std::string_view to_string(Axis a);
/// Throws ValidationError (UNKNOWN_AXIS) for unrecognised names.
Axis parse_axis(std::string_view name);
SystemParams set_axis(SystemParams p, Axis axis, double value);
double get_axis(const SystemParams& p, Axis axis);

struct SweepRow {
  double axis_value{0.0};
  SystemParams params;
  bool excluded{false};
  std::string reason;
  EigenTriple eigs{};
  std::optional<DiscriminantSet> disc;
};

struct SweepOptions {
  ConstraintMode constraint{ConstraintMode::None};
  Branch branch{Branch::Plus};
  unsigned threads{1};
};

/// Parameters at one axis value after the constraint mode is applied.
ConstrainedParams constrained_at(const SystemParams& base, Axis axis, double value,
                                 ConstraintMode mode, Branch branch, bool clamp = false);

/// Evaluates the spectrum on `steps` equally spaced axis values in
/// [lo, hi]. Branches are paired by continuity between consecutive
/// non-excluded rows.
std::vector<SweepRow> spectrum_sweep(const SystemParams& base, Axis axis, double lo, double hi,
                                     int steps, const SweepOptions& opts = {});

/// Reorders branches of each row to follow the previous row.
void pair_branches(std::vector<SweepRow>& rows);

}  // namespace epsurf
