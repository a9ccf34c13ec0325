#include "epsurf/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "parallel.hpp"

namespace epsurf {

namespace {

constexpr std::array<std::array<int, 3>, 6> kPerms{{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

double eval_real(const CubicCoeffs& c, double x) { return ((c.a * x + c.b) * x + c.c) * x + c.d; }

cplx eval_complex(const CubicCoeffs& c, cplx x) { return ((c.a * x + c.b) * x + c.c) * x + c.d; }

cplx eval_complex(const ComplexCubic& c, cplx x) { return ((x + c.c2) * x + c.c1) * x + c.c0; }

// One Newton step, kept only if it lowers the residual.
template <class F, class DF, class T>
T polish(const F& f, const DF& df, T x) {
  const T fx = f(x);
  const T dfx = df(x);
  if (std::abs(dfx) == 0.0) return x;
  const T next = x - fx / dfx;
  return std::abs(f(next)) < std::abs(fx) ? next : x;
}

EigenTriple label_real_three(std::array<double, 3> r) {
  std::sort(r.begin(), r.end());
  return {r[2], r[0], r[1], Classification::ThreeRealDistinct};
}

// The two closest roots become the coalescing pair.
EigenTriple label_ep2(const std::array<cplx, 3>& r) {
  int best_i = 0, best_j = 1;
  double best = std::abs(r[0] - r[1]);
  for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 2}}) {
    if (std::abs(r[i] - r[j]) < best) {
      best = std::abs(r[i] - r[j]);
      best_i = i;
      best_j = j;
    }
  }
  const int k = 3 - best_i - best_j;
  cplx hi = r[best_i], lo = r[best_j];
  if (hi.real() < lo.real() || (hi.real() == lo.real() && hi.imag() < lo.imag())) std::swap(hi, lo);
  return {hi, lo, r[k], Classification::EP2};
}

}  // namespace

double CubicCoeffs::scale() const { return std::max({1.0, std::abs(b), std::abs(c), std::abs(d)}); }

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::ThreeRealDistinct: return "THREE_REAL_DISTINCT";
    case Classification::OneRealPlusConjugatePair: return "ONE_REAL_PLUS_CONJUGATE_PAIR";
    case Classification::EP2: return "EP2";
    case Classification::EP3: return "EP3";
    case Classification::NonPseudoHermitian: return "NON_PSEUDO_HERMITIAN";
  }
  return "?";
}

EigenTriple EigenTriple::shifted(cplx offset, double scale) const {
  return {offset + scale * lambda_plus, offset + scale * lambda_minus,
          offset + scale * lambda_zero, classification};
}

ComplexCubic char_poly_general(const ComplexMatrix3& h) {
  const cplx minors = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0) + h(0, 0) * h(2, 2) -
                      h(0, 2) * h(2, 0) + h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
  const cplx det = h(0, 0) * (h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1)) -
                   h(0, 1) * (h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0)) +
                   h(0, 2) * (h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0));
  return {-h.trace(), minors, -det};
}

CubicCoeffs cubic_coeffs_reduced(const SystemParams& p) {
  validate(p);
  const ConstraintResiduals r = ph_residuals(p);
  if (r.max_abs() > 1e-9) {
    throw PreconditionViolated("reduced secular cubic requires pseudo-Hermitian parameters; "
                               "max residual " + std::to_string(r.max_abs()));
  }
  const auto [d1, d2] = detunings(p);
  const double k1 = p.kappa1, k2 = p.kappa2, k3 = p.kappa3;
  CubicCoeffs c;
  c.b = -(d1 + d2);
  c.c = d1 * d2 - (p.g12 * p.g12 + p.g13 * p.g13 + p.g23 * p.g23) - (k1 * k2 + k1 * k3 + k2 * k3);
  c.d = d1 * p.g23 * p.g23 + d2 * p.g13 * p.g13 - 2.0 * p.g12 * p.g13 * p.g23 +
        (d1 * k2 + d2 * k1) * k3;
  return c;
}

DiscriminantSet discriminants(const CubicCoeffs& c) {
  DiscriminantSet s;
  s.A = c.b * c.b - 3.0 * c.a * c.c;
  s.B = c.b * c.c - 9.0 * c.a * c.d;
  s.C = c.c * c.c - 3.0 * c.b * c.d;
  s.Delta = s.B * s.B - 4.0 * s.A * s.C;
  return s;
}

double default_tolerance(const CubicCoeffs& c) { return 1e-8 * c.scale(); }

EigenTriple solve_cubic(const CubicCoeffs& c, std::optional<double> tol_opt) {
  if (c.a != 1.0) throw ValidationError("solve_cubic expects a monic cubic (a = 1)");
  if (!std::isfinite(c.b) || !std::isfinite(c.c) || !std::isfinite(c.d))
    throw ValidationError("non-finite cubic coefficient");
  const double tol = tol_opt.value_or(default_tolerance(c));
  const DiscriminantSet ds = discriminants(c);
  const double shift = -c.b / 3.0;

  if (std::abs(ds.Delta) <= tol && std::abs(ds.A) <= tol && std::abs(ds.B) <= tol)
    return {shift, shift, shift, Classification::EP3};

  // Depressed form t^3 + p t + q with x = t + shift.
  const double p = c.c - c.b * c.b / 3.0;
  const double q = 2.0 * c.b * c.b * c.b / 27.0 - c.b * c.c / 3.0 + c.d;
  auto f = [&](auto x) { return eval_complex(c, x); };
  auto df = [&](auto x) { return (3.0 * x + 2.0 * c.b) * x + c.c; };
  auto fr = [&](double x) { return eval_real(c, x); };

  EigenTriple out;
  if (ds.Delta < 0.0 && p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    std::array<double, 3> r;
    for (int k = 0; k < 3; ++k) {
      const double x = shift + m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
      r[k] = polish(fr, [&](double y) { return (3.0 * y + 2.0 * c.b) * y + c.c; }, x);
    }
    out = label_real_three(r);
  } else {
    const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double u = std::cbrt(-q / 2.0 - std::copysign(s, q));
    const double v = (u == 0.0) ? 0.0 : -p / (3.0 * u);
    const double real_root = polish(fr, [&](double y) { return (3.0 * y + 2.0 * c.b) * y + c.c; },
                                    shift + u + v);
    cplx pair{shift - (u + v) / 2.0, std::sqrt(3.0) / 2.0 * std::abs(u - v)};
    pair = polish(f, df, pair);
    if (pair.imag() < 0.0) pair = std::conj(pair);
    out = {pair, std::conj(pair), real_root, Classification::OneRealPlusConjugatePair};
  }

  if (std::abs(ds.Delta) <= tol) return label_ep2(out.values());
  if (ds.Delta < 0.0 && out.classification != Classification::ThreeRealDistinct) {
    // p >= 0 with Delta < 0 cannot happen in exact arithmetic; keep the roots, fix the tag.
    out.classification = Classification::ThreeRealDistinct;
  } else if (ds.Delta > 0.0) {
    out.classification = Classification::OneRealPlusConjugatePair;
  }
  return out;
}

EigenTriple solve_cubic_complex(const ComplexCubic& c) {
  const cplx shift = -c.c2 / 3.0;
  const cplx p = c.c1 - c.c2 * c.c2 / 3.0;
  const cplx q = 2.0 * c.c2 * c.c2 * c.c2 / 27.0 - c.c2 * c.c1 / 3.0 + c.c0;
  const cplx s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  const cplx w1 = -q / 2.0 + s, w2 = -q / 2.0 - s;
  const cplx w = std::abs(w1) >= std::abs(w2) ? w1 : w2;
  const cplx u = (std::abs(w) == 0.0) ? cplx{} : std::pow(w, 1.0 / 3.0);
  const cplx v = (std::abs(u) == 0.0) ? cplx{} : -p / (3.0 * u);
  const cplx omega{-0.5, std::sqrt(3.0) / 2.0};

  auto f = [&](cplx x) { return eval_complex(c, x); };
  auto df = [&](cplx x) { return (3.0 * x + 2.0 * c.c2) * x + c.c1; };
  std::array<cplx, 3> r{shift + u + v, shift + omega * u + std::conj(omega) * v,
                        shift + std::conj(omega) * u + omega * v};
  for (auto& x : r) x = polish(f, df, x);

  // Root closest to the real axis is lambda0; the other two are ordered by imaginary part.
  auto idx = std::min_element(r.begin(), r.end(), [](cplx a, cplx b) {
    return std::abs(a.imag()) < std::abs(b.imag());
  });
  std::swap(*idx, r[2]);
  if (r[0].imag() < r[1].imag()) std::swap(r[0], r[1]);
  return {r[0], r[1], r[2], Classification::NonPseudoHermitian};
}

std::array<cplx, 3> eigensolve_oracle(const ComplexMatrix3& h) {
  Eigen::Matrix3cd m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = h(i, j);
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver;
  solver.setMaxIterations(300);
  solver.compute(m, false);
  std::array<cplx, 3> ev{};
  if (solver.info() != Eigen::Success) {
    double residual = 0.0;
    for (int i = 0; i < 3; ++i) {
      const cplx lam = solver.eigenvalues()(i);
      residual = std::max(residual, std::abs((m - lam * Eigen::Matrix3cd::Identity()).determinant()));
    }
    throw NonConvergence("QR eigensolver did not converge", residual);
  }
  for (int i = 0; i < 3; ++i) ev[i] = solver.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return ev;
}

EigenTriple eigenvalues(const SystemParams& p) {
  const SystemParams n = normalize(p);
  EigenTriple t = is_pseudo_hermitian(n, 1e-9) ? solve_cubic(cubic_coeffs_reduced(n))
                                              : solve_cubic_complex(char_poly_general(build_matrix(n)));
  return t.shifted(p.omega3, p.kappa2);
}

double multiset_distance(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& perm : kPerms) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  }
  return best;
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::Omega1: return "omega1";
    case Axis::Omega2: return "omega2";
    case Axis::Omega3: return "omega3";
    case Axis::Kappa1: return "kappa1";
    case Axis::Kappa2: return "kappa2";
    case Axis::Kappa3: return "kappa3";
    case Axis::G12: return "g12";
    case Axis::G13: return "g13";
    case Axis::G23: return "g23";
    case Axis::Delta1: return "delta1";
    case Axis::Delta2: return "delta2";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  for (auto a : {Axis::Omega1, Axis::Omega2, Axis::Omega3, Axis::Kappa1, Axis::Kappa2, Axis::Kappa3,
                 Axis::G12, Axis::G13, Axis::G23, Axis::Delta1, Axis::Delta2}) {
    if (name == to_string(a)) return a;
  }
  throw ValidationError("unknown axis '" + std::string(name) + "'");
}

SystemParams set_axis(SystemParams p, Axis axis, double value) {
  switch (axis) {
    case Axis::Omega1: p.omega1 = value; break;
    case Axis::Omega2: p.omega2 = value; break;
    case Axis::Omega3: p.omega3 = value; break;
    case Axis::Kappa1: p.kappa1 = value; break;
    case Axis::Kappa2: p.kappa2 = value; break;
    case Axis::Kappa3: p.kappa3 = value; break;
    case Axis::G12: p.g12 = value; break;
    case Axis::G13: p.g13 = value; break;
    case Axis::G23: p.g23 = value; break;
    case Axis::Delta1: p.omega1 = p.omega3 + value; break;
    case Axis::Delta2: p.omega2 = p.omega3 + value; break;
  }
  return p;
}

double get_axis(const SystemParams& p, Axis axis) {
  switch (axis) {
    case Axis::Omega1: return p.omega1;
    case Axis::Omega2: return p.omega2;
    case Axis::Omega3: return p.omega3;
    case Axis::Kappa1: return p.kappa1;
    case Axis::Kappa2: return p.kappa2;
    case Axis::Kappa3: return p.kappa3;
    case Axis::G12: return p.g12;
    case Axis::G13: return p.g13;
    case Axis::G23: return p.g23;
    case Axis::Delta1: return p.omega1 - p.omega3;
    case Axis::Delta2: return p.omega2 - p.omega3;
  }
  return 0.0;
}

ConstrainedParams constrained_at(const SystemParams& base, Axis axis, double value,
                                 ConstraintMode mode, Branch branch, bool clamp) {
  return apply_constraint(set_axis(base, axis, value), mode, branch, clamp);
}

std::vector<SweepRow> spectrum_sweep(const SystemParams& base, Axis axis, double lo, double hi,
                                     int steps, const SweepOptions& opts) {
  if (steps < 2) throw ValidationError("sweep needs at least 2 steps");
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ValidationError("sweep range must satisfy lo <= hi");
  validate(base);

  std::vector<SweepRow> rows(static_cast<std::size_t>(steps));
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.axis_value = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    ConstrainedParams cp = constrained_at(base, axis, row.axis_value, opts.constraint, opts.branch);
    row.params = cp.params;
    if (!cp.feasible) {
      row.excluded = true;
      row.reason = cp.reason;
      return;
    }
    row.eigs = eigenvalues(row.params);
    const SystemParams n = normalize(row.params);
    if (is_pseudo_hermitian(n, 1e-9)) row.disc = discriminants(cubic_coeffs_reduced(n));
  };

  detail::parallel_for(rows.size(), opts.threads, work);
  pair_branches(rows);
  return rows;
}

void pair_branches(std::vector<SweepRow>& rows) {
  const SweepRow* prev = nullptr;
  for (auto& row : rows) {
    if (row.excluded) continue;
    if (prev != nullptr) {
      const auto ref = prev->eigs.values();
      const auto cur = row.eigs.values();
      const std::array<int, 3>* best = &kPerms[0];
      double best_cost = std::numeric_limits<double>::infinity();
      for (const auto& perm : kPerms) {
        double cost = 0.0;
        for (int i = 0; i < 3; ++i) cost += std::abs(cur[perm[i]] - ref[i]);
        if (cost < best_cost - 1e-15) {
          best_cost = cost;
          best = &perm;
        }
      }
      row.eigs.lambda_plus = cur[(*best)[0]];
      row.eigs.lambda_minus = cur[(*best)[1]];
      row.eigs.lambda_zero = cur[(*best)[2]];
    }
    prev = &row;
  }
}

}  // namespace epsurf
