#include "epsurf/exceptional.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace epsurf {

Ep3Residuals ep3_residuals(const SystemParams& raw) {
  validate(raw);
  const ConstraintResiduals r = ph_residuals(raw);
  if (r.max_abs() > 1e-9) {
    throw PreconditionViolated("EP3 conditions require pseudo-Hermitian parameters; max residual " +
                               std::to_string(r.max_abs()));
  }
  const SystemParams p = normalize(raw);
  const double k1 = p.kappa1, k2 = p.kappa2;
  const double d1 = p.omega1 - p.omega3;
  const double g12s = p.g12 * p.g12, g13s = p.g13 * p.g13, g23s = p.g23 * p.g23;
  const double xi = (g12s + 9.0 * k1 * k2) * (k1 - k2) - g13s * (8.0 * k1 + k2) +
                    g23s * (k1 + 8.0 * k2) + 8.0 * (k1 * k1 * k1 - k2 * k2 * k2);
  Ep3Residuals e;
  e.e1 = (k1 * k1 + k1 * k2 + k2 * k2) * (d1 * d1 - 3.0 * k2 * k2) + 3.0 * k2 * k2 * (g12s + g13s + g23s);
  e.e2 = (k1 - k2) * k1 * d1 * d1 * d1 - 18.0 * k2 * k2 * p.g13 * p.g23 * p.g12 + xi * d1 * k2;
  return e;
}

cplx lambda_ep3(const SystemParams& p) {
  return p.omega3 + ((p.omega1 - p.omega3) + (p.omega2 - p.omega3)) / 3.0;
}

// ---------------------------------------------------------------------------
// Search along an axis

namespace {

struct Probe {
  bool feasible{false};
  SystemParams params;  // normalized
  CubicCoeffs coeffs;
  DiscriminantSet ds{};
};

class AxisProbe {
 public:
  AxisProbe(const SystemParams& base, Axis axis, ConstraintMode mode, Branch branch)
      : base_(base), axis_(axis), mode_(mode), branch_(branch) {}

  Probe operator()(double x, bool clamp = false) const {
    Probe pr;
    const ConstrainedParams cp = constrained_at(base_, axis_, x, mode_, branch_, clamp);
    if (!cp.feasible) return pr;
    pr.params = normalize(cp.params);
    if (!is_pseudo_hermitian(pr.params, 1e-9)) return pr;
    pr.coeffs = cubic_coeffs_reduced(pr.params);
    pr.ds = discriminants(pr.coeffs);
    pr.feasible = true;
    return pr;
  }

 private:
  SystemParams base_;
  Axis axis_;
  ConstraintMode mode_;
  Branch branch_;
};

// Shrinks [a, b] around a change of pred() until narrower than tol.
template <class Pred>
double bisect_predicate(Pred&& pred, double a, double b, double tol) {
  const bool pa = pred(a);
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (pred(m) == pa) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

struct Candidate {
  double x;
  int order;
};

ExceptionalPoint make_point(const Probe& pr, double x, int order) {
  ExceptionalPoint ep;
  ep.order = order;
  ep.axis_value = x;
  ep.params = pr.params;
  ep.A = pr.ds.A;
  ep.B = pr.ds.B;
  ep.Delta = pr.ds.Delta;
  if (order == 3) {
    ep.lambda = lambda_ep3(pr.params);
  } else {
    const auto r = solve_cubic(pr.coeffs).values();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        if (std::abs(r[i] - r[j]) < best) {
          best = std::abs(r[i] - r[j]);
          ep.lambda = 0.5 * (r[i] + r[j]);
        }
      }
    }
  }
  return ep;
}

}  // namespace

EpSearchResult find_ep_along_axis(const SystemParams& base, Axis axis, double lo, double hi,
                                  ConstraintMode mode, const EpSearchOptions& opts) {
  if (!(lo < hi)) throw ValidationError("EP search needs lo < hi");
  if (opts.grid < 2) throw ValidationError("EP search grid needs at least 2 points");
  validate(base);

  const AxisProbe probe(base, axis, mode, opts.branch);
  const double h = (hi - lo) / (opts.grid - 1);
  std::vector<double> xs(static_cast<std::size_t>(opts.grid));
  std::vector<Probe> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = (i + 1 == xs.size()) ? hi : lo + h * static_cast<double>(i);
    pts[i] = probe(xs[i]);
  }

  auto is_ep3 = [&](const Probe& p) {
    return p.feasible && std::abs(p.ds.A) <= opts.ep_tol && std::abs(p.ds.B) <= opts.ep_tol;
  };

  EpSearchResult result;
  std::vector<Candidate> cands;

  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const Probe& p0 = pts[i];
    const Probe& p1 = pts[i + 1];

    if (p0.feasible != p1.feasible) {
      auto feasible = [&](double x) { return probe(x).feasible; };
      const double mid = bisect_predicate(feasible, xs[i], xs[i + 1], opts.bisect_tol);
      const double half = 0.5 * opts.bisect_tol;
      const double inside = p0.feasible ? mid - half : mid + half;
      const double outside = p0.feasible ? mid + half : mid - half;
      result.edges.push_back({inside, p1.feasible});
      // The limit point on the boundary is where the clamped radicand is zero.
      const Probe limit = probe(outside, true);
      if (is_ep3(limit)) {
        cands.push_back({outside, 3});
      } else if (limit.feasible && std::abs(limit.ds.Delta) <= opts.ep_tol) {
        cands.push_back({outside, 2});
      }
      continue;
    }
    if (!p0.feasible) continue;

    const double d0 = p0.ds.Delta, d1 = p1.ds.Delta;
    if (d0 == 0.0 || (d0 < 0.0) != (d1 < 0.0)) {
      double x;
      if (d0 == 0.0) {
        x = xs[i];
      } else {
        auto neg = [&](double t) {
          const Probe q = probe(t);
          return q.feasible && q.ds.Delta < 0.0;
        };
        x = bisect_predicate(neg, xs[i], xs[i + 1], opts.bisect_tol);
      }
      const Probe q = probe(x);
      if (q.feasible) cands.push_back({x, is_ep3(q) ? 3 : 2});
    }
    if (i + 2 == xs.size() && d1 == 0.0) {
      cands.push_back({xs[i + 1], is_ep3(p1) ? 3 : 2});
    }

    const double a0 = p0.ds.A, a1 = p1.ds.A;
    if ((a0 < 0.0) != (a1 < 0.0)) {
      auto neg = [&](double t) {
        const Probe q = probe(t);
        return q.feasible && q.ds.A < 0.0;
      };
      const double x = bisect_predicate(neg, xs[i], xs[i + 1], opts.bisect_tol);
      if (is_ep3(probe(x))) cands.push_back({x, 3});
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });

  auto objective = [&](double x) {
    const Probe q = probe(x, true);
    if (!q.feasible) return std::numeric_limits<double>::max();
    return q.ds.A * q.ds.A + q.ds.B * q.ds.B;
  };

  // EP3 clusters: merged and placed at the least-squares minimum of (A, B).
  std::vector<ExceptionalPoint> ep3s;
  for (std::size_t i = 0; i < cands.size();) {
    if (cands[i].order != 3) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < cands.size() && cands[j + 1].order == 3 && cands[j + 1].x - cands[j].x <= h) ++j;
    double best_x = cands[i].x;
    double best_f = objective(best_x);
    for (std::size_t k = i + 1; k <= j; ++k) {
      const double f = objective(cands[k].x);
      if (f < best_f) {
        best_f = f;
        best_x = cands[k].x;
      }
    }
    const double a = std::max(lo, cands[i].x - 0.5 * h);
    const double b = std::min(hi, cands[j].x + 0.5 * h);
    const auto [xm, fm] =
        boost::math::tools::brent_find_minima(objective, a, b, std::numeric_limits<double>::digits);
    if (fm < best_f) best_x = xm;
    ep3s.push_back(make_point(probe(best_x, true), best_x, 3));
    i = j + 1;
  }

  std::vector<ExceptionalPoint> ep2s;
  for (const Candidate& c : cands) {
    if (c.order != 2) continue;
    const bool absorbed = std::any_of(ep3s.begin(), ep3s.end(), [&](const ExceptionalPoint& e) {
      return std::abs(e.axis_value - c.x) <= h;
    });
    const bool duplicate = !ep2s.empty() && std::abs(ep2s.back().axis_value - c.x) <= 10.0 * opts.bisect_tol;
    if (absorbed || duplicate) continue;
    ep2s.push_back(make_point(probe(c.x, true), c.x, 2));
  }

  result.points = std::move(ep3s);
  result.points.insert(result.points.end(), ep2s.begin(), ep2s.end());
  std::sort(result.points.begin(), result.points.end(),
            [](const ExceptionalPoint& a, const ExceptionalPoint& b) { return a.axis_value < b.axis_value; });
  return result;
}

// ---------------------------------------------------------------------------
// Exceptional lines and surface

std::size_t ManifoldMesh::size() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.samples.size();
  return n;
}

namespace {

ManifoldSample complete_sample(const SystemParams& p) {
  const CubicCoeffs c = cubic_coeffs_reduced(p);
  const DiscriminantSet ds = discriminants(c);
  ManifoldSample s;
  s.g13 = p.g13;
  s.g23 = p.g23;
  s.kappa1 = p.kappa1;
  s.ep.order = 3;
  s.ep.axis_value = p.g13;
  s.ep.params = p;
  s.ep.lambda = lambda_ep3(p);
  s.ep.A = ds.A;
  s.ep.B = ds.B;
  s.ep.Delta = ds.Delta;
  return s;
}

double sample_g13(double gmax, int i, int n) {
  return (i + 1 == n) ? gmax : gmax * static_cast<double>(i) / (n - 1);
}

// Along the line e1 = 0 in (u, v) = (g23^2, delta1^2), with g12^2 taken from
// the third balance condition and kappa2 = 1.
struct El3Segment {
  double k1, g13;
  double u0, v0, du, dv;  // point(t) = (u0 + t du, v0 + t dv)
  double tlo, thi;

  double g12sq(double u, double v) const {
    return (g13 * g13 + k1 * u) / (k1 + 1.0) - k1 * v - k1;
  }

  // e2 with delta1 = sign * sqrt(v).
  double e2(double t, double sign) const {
    const double u = std::max(0.0, u0 + t * du);
    const double v = std::max(0.0, v0 + t * dv);
    const double g12s = std::max(0.0, g12sq(u, v));
    const double d1 = sign * std::sqrt(v);
    const double g13s = g13 * g13;
    const double xi = (g12s + 9.0 * k1) * (k1 - 1.0) - g13s * (8.0 * k1 + 1.0) + u * (k1 + 8.0) +
                      8.0 * (k1 * k1 * k1 - 1.0);
    return (k1 - 1.0) * k1 * d1 * d1 * d1 - 18.0 * g13 * std::sqrt(u) * std::sqrt(g12s) + xi * d1;
  }

  SystemParams params(double t, double sign) const {
    const double u = std::max(0.0, u0 + t * du);
    const double v = std::max(0.0, v0 + t * dv);
    SystemParams p;
    p.kappa1 = k1;
    p.kappa2 = 1.0;
    p.kappa3 = -(k1 + 1.0);
    p.g13 = g13;
    p.g23 = std::sqrt(u);
    p.g12 = std::sqrt(std::max(0.0, g12sq(u, v)));
    const double d1 = sign * std::sqrt(v);
    return with_detunings(p, d1, -k1 * d1);
  }
};

std::optional<El3Segment> el3_segment(double k1, double g13) {
  const double a = (k1 - 1.0) * (k1 - 1.0) * (k1 + 1.0);
  const double b = 3.0 * (2.0 * k1 + 1.0);
  double R = 3.0 * ((k1 + 1.0) * (k1 + 1.0) * (k1 + 1.0) - g13 * g13 * (k1 + 2.0));
  if (R < 0.0) {
    if (R < -1e-12) return std::nullopt;
    R = 0.0;
  }
  El3Segment s{k1, g13, R / b, 0.0, a, -b, -std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
  const double norm = std::hypot(a, b);
  s.du /= norm;
  s.dv /= norm;

  // Half-planes n . (u, v) >= c.
  struct HalfPlane {
    double nu, nv, c;
  };
  const HalfPlane planes[] = {
      {1.0, 0.0, 0.0},
      {0.0, 1.0, 0.0},
      {k1 / (k1 + 1.0), -k1, k1 - g13 * g13 / (k1 + 1.0)},
  };
  for (const auto& hp : planes) {
    const double nd = hp.nu * s.du + hp.nv * s.dv;
    const double n0 = hp.nu * s.u0 + hp.nv * s.v0 - hp.c;
    if (std::abs(nd) < 1e-14) {
      if (n0 < -1e-12) return std::nullopt;
      continue;
    }
    const double t = -n0 / nd;
    if (nd > 0.0) s.tlo = std::max(s.tlo, t);
    else s.thi = std::min(s.thi, t);
  }
  if (s.tlo > s.thi) {
    if (s.tlo - s.thi > 1e-12) return std::nullopt;
    s.thi = s.tlo;
  }
  return s;
}

struct El3Root {
  SystemParams params;
  double g23;
  double d1;
};

std::vector<El3Root> el3_roots(double k1, double g13) {
  std::vector<El3Root> roots;
  const auto seg = el3_segment(k1, g13);
  if (!seg) return roots;

  for (double sign : {-1.0, 1.0}) {
    if (seg->thi - seg->tlo <= 1e-14) {
      const double t = seg->tlo;
      if (std::abs(seg->e2(t, sign)) <= 1e-12) {
        const SystemParams p = seg->params(t, sign);
        roots.push_back({p, p.g23, p.omega1});
      }
      continue;
    }
    constexpr int kScan = 256;
    double t_prev = seg->tlo;
    double f_prev = seg->e2(t_prev, sign);
    for (int k = 1; k <= kScan; ++k) {
      const double t = (k == kScan) ? seg->thi : seg->tlo + (seg->thi - seg->tlo) * k / kScan;
      const double f = seg->e2(t, sign);
      double root = std::numeric_limits<double>::quiet_NaN();
      if (f_prev == 0.0) {
        root = t_prev;
      } else if (f == 0.0 && k == kScan) {
        root = t;
      } else if ((f_prev < 0.0) != (f < 0.0) && f != 0.0) {
        double a = t_prev, b = t, fa = f_prev;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
          const double m = 0.5 * (a + b);
          const double fm = seg->e2(m, sign);
          if (fm == 0.0) {
            a = b = m;
            break;
          }
          if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        root = 0.5 * (a + b);
      }
      if (!std::isnan(root)) {
        const SystemParams p = seg->params(root, sign);
        roots.push_back({p, p.g23, p.omega1});
      }
      t_prev = t;
      f_prev = f;
    }
  }

  // Points with the same (g13, g23) but opposite delta1 sign: keep delta1 <= 0.
  std::sort(roots.begin(), roots.end(), [](const El3Root& a, const El3Root& b) {
    return a.g23 > b.g23 || (a.g23 == b.g23 && a.d1 < b.d1);
  });
  std::vector<El3Root> unique;
  for (const auto& r : roots) {
    if (!unique.empty() && std::abs(unique.back().g23 - r.g23) <= 1e-9) {
      if (unique.back().d1 > 0.0 && r.d1 <= 0.0) unique.back() = r;
      continue;
    }
    unique.push_back(r);
  }
  return unique;
}

}  // namespace

double el3_footprint_max(double k1) {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) throw ValidationError("kappa1/kappa2 must be >= 0");
  return std::sqrt((k1 + 1.0) * (k1 + 1.0) * (k1 + 1.0) / (k1 + 2.0));
}

ManifoldMesh el3_pt(int samples) {
  if (samples < 2) throw ValidationError("el3 needs at least 2 samples");
  const double gmax = std::sqrt(0.5);
  const double c43 = 0.75 * std::cbrt(4.0);
  ManifoldMesh mesh;
  mesh.kind = ManifoldKind::EL3;
  mesh.convention = "pt: kappa1=0, kappa3=-kappa2, delta2=0, g12=g13";
  ManifoldSlice slice;
  slice.kappa1 = 0.0;
  slice.footprint_lo = 0.0;
  slice.footprint_hi = gmax;
  for (int i = 0; i < samples; ++i) {
    const double g13 = sample_g13(gmax, i, samples);
    const double g23 = std::sqrt(std::max(0.0, 1.0 - 0.5 * g13 * g13 - c43 * std::pow(g13, 4.0 / 3.0)));
    // Second EP condition has a non-positive denominator on the line, so delta1 <= 0.
    const double d1 = -std::sqrt(std::max(0.0, 3.0 - 6.0 * g13 * g13 - 3.0 * g23 * g23));
    slice.samples.push_back(complete_sample(pt_specialize(1.0, g13, g23, d1)));
  }
  mesh.slices.push_back(std::move(slice));
  return mesh;
}

ManifoldMesh el3_general(double kappa1_ratio, int samples) {
  if (samples < 2) throw ValidationError("el3 needs at least 2 samples");
  const double k1 = kappa1_ratio;
  const double gmax = el3_footprint_max(k1);

  ManifoldMesh mesh;
  mesh.kind = ManifoldKind::EL3;
  mesh.convention =
      "g12 dependent via third balance condition; delta2=-kappa1*delta1/kappa2; delta1<=0 on ties";
  ManifoldSlice slice;
  slice.kappa1 = k1;
  slice.footprint_lo = 0.0;
  slice.footprint_hi = gmax;

  std::optional<double> prev_g23;
  for (int i = 0; i < samples; ++i) {
    const double g13 = sample_g13(gmax, i, samples);
    const auto roots = el3_roots(k1, g13);
    if (roots.empty()) continue;
    const El3Root* pick = &roots.front();
    if (prev_g23) {
      for (const auto& r : roots)
        if (std::abs(r.g23 - *prev_g23) < std::abs(pick->g23 - *prev_g23)) pick = &r;
    }
    prev_g23 = pick->g23;
    slice.samples.push_back(complete_sample(pick->params));
  }
  mesh.slices.push_back(std::move(slice));
  return mesh;
}

ManifoldMesh es3_scan(double kappa1_lo, double kappa1_hi, int slices, int samples, unsigned threads) {
  if (!(kappa1_lo >= 0.0) || !(kappa1_lo < kappa1_hi))
    throw ValidationError("es3 scan needs 0 <= kappa1_lo < kappa1_hi");
  if (slices < 2) throw ValidationError("es3 scan needs at least 2 slices");
  if (samples < 2) throw ValidationError("es3 scan needs at least 2 samples per slice");

  std::vector<ManifoldSlice> out(static_cast<std::size_t>(slices));
  detail::parallel_for(out.size(), threads, [&](std::size_t j) {
    const double k1 = (j + 1 == out.size())
                          ? kappa1_hi
                          : kappa1_lo + (kappa1_hi - kappa1_lo) * static_cast<double>(j) / (slices - 1);
    out[j] = std::move(el3_general(k1, samples).slices.front());
  });

  ManifoldMesh mesh;
  mesh.kind = ManifoldKind::ES3;
  mesh.convention = el3_general(kappa1_lo, 2).convention;
  mesh.slices = std::move(out);
  return mesh;
}

double distance_to_slice(const ManifoldSlice& slice, double g13, double g23) {
  double best = std::numeric_limits<double>::infinity();
  const auto& s = slice.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    best = std::min(best, std::hypot(s[i].g13 - g13, s[i].g23 - g23));
    if (i + 1 == s.size()) break;
    const double ax = s[i].g13, ay = s[i].g23;
    const double bx = s[i + 1].g13, by = s[i + 1].g23;
    const double len2 = (bx - ax) * (bx - ax) + (by - ay) * (by - ay);
    if (len2 == 0.0) continue;
    const double t = std::clamp(((g13 - ax) * (bx - ax) + (g23 - ay) * (by - ay)) / len2, 0.0, 1.0);
    best = std::min(best, std::hypot(ax + t * (bx - ax) - g13, ay + t * (by - ay) - g23));
  }
  return best;
}

}  // namespace epsurf
