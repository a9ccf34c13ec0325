#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epsurf/model.hpp"
#include "epsurf/pseudoherm.hpp"
#include "epsurf/spectrum.hpp"

namespace epsurf {

struct ExceptionalPoint {
  int order{3};
  double axis_value{0.0};  ///< sweep coordinate, when located along an axis
  SystemParams params;     ///< normalized frame (kappa2 = 1, omega3 = 0)
  cplx lambda;             ///< coalesced eigenvalue, normalized
  double A{0.0}, B{0.0}, Delta{0.0};
};

/// EP3 conditions expanded under pseudo-Hermiticity, normalized frame.
/// Both vanish exactly where A = B = 0 (e1 = kappa2^2 A, e2 = -kappa2^2 B).
struct Ep3Residuals {
  double e1;
  double e2;
};

/// Throws PreconditionViolated unless p is pseudo-Hermitian within 1e-9.
Ep3Residuals ep3_residuals(const SystemParams& p);

/// The triple eigenvalue omega3 + (delta1 + delta2) / 3, in the units of p.
cplx lambda_ep3(const SystemParams& p);

struct EpSearchOptions {
  int grid{512};
  double bisect_tol{1e-10};
  /// |A|, |B| at or below this (normalized units) makes a zero an EP3.
  double ep_tol{1e-8};
  Branch branch{Branch::Plus};
};

struct FeasibilityEdge {
  double axis_value;  ///< limit point on the feasible side
  bool entering;      ///< true if the constraint becomes solvable with increasing axis
};

struct EpSearchResult {
  std::vector<ExceptionalPoint> points;  ///< sorted by axis value
  std::vector<FeasibilityEdge> edges;
};

/**
 * Locates EP2s and EP3s along one axis in [lo, hi].
 *
 * Sign changes of Delta on a uniform grid are bisected; zeros of A are
 * bisected as well so that an EP3 where Delta only touches zero is found.
 * Edges of the constraint's feasible region are bisected and the limit
 * point is tested as a candidate. EP3 candidates closer than one grid
 * cell are merged.
 */
EpSearchResult find_ep_along_axis(const SystemParams& base, Axis axis, double lo, double hi,
                                  ConstraintMode mode, const EpSearchOptions& opts = {});

enum class ManifoldKind { EL3, ES3 };

struct ManifoldSample {
  double g13;  ///< normalized by kappa2
  double g23;
  double kappa1;
  ExceptionalPoint ep;
};

/// One exceptional line at fixed kappa1/kappa2. Ragged: samples where no
/// root was found are absent.
struct ManifoldSlice {
  double kappa1{0.0};
  double footprint_lo{0.0};
  double footprint_hi{0.0};
  std::vector<ManifoldSample> samples;  ///< increasing g13
};

struct ManifoldMesh {
  ManifoldKind kind{ManifoldKind::EL3};
  std::string convention;
  std::vector<ManifoldSlice> slices;

  std::size_t size() const;
};

/// Closed-form exceptional line of the PT slice (kappa1 = 0), normalized.
ManifoldMesh el3_pt(int samples);

/// Exceptional line at kappa1/kappa2 = kappa1_ratio, found numerically.
/// g12 is a dependent output; g13 runs over the analytic footprint
/// [0, sqrt((k1 + 1)^3 / (k1 + 2))].
ManifoldMesh el3_general(double kappa1_ratio, int samples);

/// Stack of exceptional lines over kappa1/kappa2 in [lo, hi].
ManifoldMesh es3_scan(double kappa1_lo, double kappa1_hi, int slices, int samples,
                      unsigned threads = 1);

/// Upper end of the g13 footprint of the exceptional line at kappa1/kappa2.
double el3_footprint_max(double kappa1_ratio);

/// Distance from (g13, g23) to the polyline through a slice's samples.
double distance_to_slice(const ManifoldSlice& slice, double g13, double g23);

}  // namespace epsurf
