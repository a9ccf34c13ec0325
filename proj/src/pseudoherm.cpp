#include "epsurf/pseudoherm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace epsurf {

double ConstraintResiduals::max_abs() const {
  return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
}

ConstraintResiduals ph_residuals(const SystemParams& raw) {
  const SystemParams p = normalize(raw);
  const double d1 = p.omega1 - p.omega3;
  const double d2 = p.omega2 - p.omega3;
  const double k1 = p.kappa1, k2 = p.kappa2, k3 = p.kappa3;
  ConstraintResiduals r;
  r.r1 = k1 + k2 + k3;
  r.r2 = d1 * k1 + d2 * k2;
  r.r3 = p.g12 * p.g12 * k3 + p.g13 * p.g13 * k2 + p.g23 * p.g23 * k1 - d1 * d2 * k3 + k1 * k2 * k3;
  return r;
}

bool is_pseudo_hermitian(const SystemParams& p, double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  return ph_residuals(p).max_abs() <= tol;
}

ConstraintSolution solve_constraints(double kappa1, double kappa2, double g12, double g13,
                                     double g23, Branch branch) {
  if (!(kappa2 > 0.0)) throw ValidationError("kappa2 must be positive");
  if (!(kappa1 >= 0.0)) throw ValidationError("kappa1 must be non-negative");
  if (!(g12 >= 0.0 && g13 >= 0.0 && g23 >= 0.0))
    throw ValidationError("coupling strengths must be non-negative");

  ConstraintSolution s;
  s.branch = branch;
  s.kappa3 = -(kappa1 + kappa2);

  if (kappa1 == 0.0) {
    // r2 forces delta2 = 0; r3 collapses to kappa2 (g13^2 - g12^2) = 0.
    s.delta2 = 0.0;
    s.delta1_free = true;
    s.residual = (g13 * g13 - g12 * g12) * kappa2;
    const double scale = std::max({1.0, g12 * g12, g13 * g13}) * kappa2;
    s.feasible = std::abs(s.residual) <= 1e-12 * scale;
    return s;
  }

  // delta1 = -(k2/k1) delta2 turns -d1 d2 k3 into (k2 k3 / k1) delta2^2.
  const double k1 = kappa1, k2 = kappa2, k3 = s.kappa3;
  const double rest = g12 * g12 * k3 + g13 * g13 * k2 + g23 * g23 * k1 + k1 * k2 * k3;
  s.radicand = -k1 / (k2 * k3) * rest;
  if (s.radicand < 0.0) {
    s.feasible = false;
    return s;
  }
  s.feasible = true;
  s.delta2 = sign_of(branch) * std::sqrt(s.radicand);
  s.delta1 = -(k2 / k1) * s.delta2;
  return s;
}

SystemParams embed(const ConstraintSolution& s, double kappa1, double kappa2, double g12,
                   double g13, double g23, double omega3, double delta1_if_free) {
  SystemParams p;
  p.omega3 = omega3;
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.kappa3 = s.kappa3;
  p.g12 = g12;
  p.g13 = g13;
  p.g23 = g23;
  return with_detunings(p, s.delta1_free ? delta1_if_free : s.delta1, s.delta2);
}

SystemParams pt_specialize(double kappa2, double g13, double g23, double delta1) {
  SystemParams p;
  p.kappa1 = 0.0;
  p.kappa2 = kappa2;
  p.kappa3 = -kappa2;
  p.g12 = g13;
  p.g13 = g13;
  p.g23 = g23;
  p = with_detunings(p, delta1, 0.0);
  validate(p);
  return p;
}

bool spectral_symmetry_check(std::span<const cplx, 3> eigs, double tol) {
  // Every permutation of the conjugates is tried; the best pairing decides.
  std::array<int, 3> perm{0, 1, 2};
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(eigs[i] - std::conj(eigs[perm[i]])));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best <= tol;
}

std::string_view to_string(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::None: return "none";
    case ConstraintMode::PT: return "pt";
    case ConstraintMode::PHSymmetric: return "ph-symmetric";
    case ConstraintMode::PHAsymmetric: return "ph-asymmetric";
    case ConstraintMode::PHGeneral: return "ph-general";
  }
  return "?";
}

std::optional<ConstraintMode> parse_constraint_mode(std::string_view s) {
  for (auto m : {ConstraintMode::None, ConstraintMode::PT, ConstraintMode::PHSymmetric,
                 ConstraintMode::PHAsymmetric, ConstraintMode::PHGeneral}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace {

ConstrainedParams solved(const SystemParams& base, double k1, double g12, double g13, double g23,
                         Branch branch, bool clamp, std::string_view label) {
  ConstraintSolution s = solve_constraints(k1, base.kappa2, g12, g13, g23, branch);
  if (clamp && !s.feasible && !s.delta1_free && s.radicand > -1e-9) {
    s.radicand = 0.0;
    s.delta1 = s.delta2 = 0.0;
    s.feasible = true;
  }
  ConstrainedParams out;
  out.radicand = s.radicand;
  out.params = embed(s, k1, base.kappa2, g12, g13, g23, base.omega3, base.omega1 - base.omega3);
  out.feasible = s.feasible;
  out.delta1_free = s.delta1_free;
  if (!s.feasible) {
    out.reason = s.delta1_free ? std::string(label) + ": kappa1=0 requires g12=g13"
                               : std::string(label) + ": delta2^2 < 0";
  }
  return out;
}

}  // namespace

ConstrainedParams apply_constraint(const SystemParams& base, ConstraintMode mode, Branch branch,
                                   bool clamp_radicand) {
  validate(base);
  const double k2 = base.kappa2;
  switch (mode) {
    case ConstraintMode::None:
      return {base, true, {}, 0.0};
    case ConstraintMode::PT: {
      SystemParams p = pt_specialize(k2, base.g13, base.g23, base.omega1 - base.omega3);
      p.omega1 += base.omega3;
      p.omega2 += base.omega3;
      p.omega3 = base.omega3;
      return {p, true, {}, 0.0, true};
    }
    case ConstraintMode::PHSymmetric:
      return solved(base, k2, 0.0, base.g13, base.g13, branch, clamp_radicand, "ph-symmetric");
    case ConstraintMode::PHAsymmetric:
      return solved(base, k2, base.g13 / std::sqrt(8.0), base.g13, 0.0, branch, clamp_radicand,
                    "ph-asymmetric");
    case ConstraintMode::PHGeneral:
      return solved(base, base.kappa1, base.g12, base.g13, base.g23, branch, clamp_radicand,
                    "ph-general");
  }
  throw ValidationError("unknown constraint mode");
}

}  // namespace epsurf
