#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "epsurf/model.hpp"

namespace epsurf {

/// Residuals of the three balance conditions that make the spectrum closed
/// under complex conjugation. Evaluated in the normalized frame.
struct ConstraintResiduals {
  double r1;  ///< kappa1 + kappa2 + kappa3
  double r2;  ///< delta1 kappa1 + delta2 kappa2
  double r3;  ///< g12^2 k3 + g13^2 k2 + g23^2 k1 - d1 d2 k3 + k1 k2 k3

  double max_abs() const;
};

enum class Branch { Plus, Minus };

inline double sign_of(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

/**
 * Dependent quantities (kappa3, delta1, delta2) that put a choice of
 * rates and couplings on the pseudo-Hermitian manifold.
 *
 * When kappa1 == 0 the detuning delta1 is left free; `delta1_free` is set
 * and `delta1` holds 0 as a placeholder.
 */
struct ConstraintSolution {
  double kappa3{0.0};
  double delta1{0.0};
  double delta2{0.0};
  Branch branch{Branch::Plus};
  bool feasible{false};
  bool delta1_free{false};
  /// delta2^2 before the square root (kappa1 > 0), kept for diagnostics.
  double radicand{0.0};
  /// Residual of the third condition when kappa1 == 0 and g12 != g13.
  double residual{0.0};
};

ConstraintResiduals ph_residuals(const SystemParams& p);

bool is_pseudo_hermitian(const SystemParams& p, double tol = 1e-9);

/// Solves for (kappa3, delta1, delta2) given the free rates and couplings.
/// Never throws for infeasible inputs; check `feasible`.
ConstraintSolution solve_constraints(double kappa1, double kappa2, double g12, double g13,
                                     double g23, Branch branch = Branch::Plus);

/// Embeds a constraint solution into a full parameter set referenced to
/// omega3. `delta1_if_free` is used when the solution leaves delta1 open.
SystemParams embed(const ConstraintSolution& s, double kappa1, double kappa2, double g12,
                   double g13, double g23, double omega3 = 0.0, double delta1_if_free = 0.0);

/// PT-symmetric slice: kappa1 = 0, kappa3 = -kappa2, delta2 = 0, g12 = g13.
SystemParams pt_specialize(double kappa2, double g13, double g23, double delta1);

/// True iff the multiset of values equals its complex conjugate within tol.
bool spectral_symmetry_check(std::span<const cplx, 3> eigs, double tol);

/// How dependent parameters are re-derived when one axis is varied.
enum class ConstraintMode {
  None,          ///< parameters used as given
  PT,            ///< kappa1 = 0 slice
  PHSymmetric,   ///< kappa1 = kappa2, g12 = 0, g23 = g13
  PHAsymmetric,  ///< kappa1 = kappa2, g12 = g13 / sqrt(8), g23 = 0
  PHGeneral,     ///< full constraint re-solve from (kappa1, kappa2, g12, g13, g23)
};

std::string_view to_string(ConstraintMode m);
std::optional<ConstraintMode> parse_constraint_mode(std::string_view s);

struct ConstrainedParams {
  SystemParams params;
  bool feasible{true};
  std::string reason;       ///< why the constraint has no real solution
  double radicand{0.0};
  bool delta1_free{false};  ///< delta1 was taken from the input, not solved for
};

/**
 * Applies a constraint mode to `base`. Free inputs are read from `base`
 * (kappa2, couplings, omega3 and, where left open, delta1); everything
 * else is overwritten. With `clamp_radicand` a slightly negative delta2^2
 * is treated as zero, which evaluates the limit point at a feasibility
 * edge.
 */
ConstrainedParams apply_constraint(const SystemParams& base, ConstraintMode mode,
                                   Branch branch = Branch::Plus, bool clamp_radicand = false);

}  // namespace epsurf
