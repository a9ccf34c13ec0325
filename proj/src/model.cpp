#include "epsurf/model.hpp"

#include <cmath>
#include <sstream>

namespace epsurf {

void validate(const SystemParams& p) {
  const double fields[] = {p.omega1, p.omega2, p.omega3, p.kappa1, p.kappa2,
                           p.kappa3, p.g12,    p.g13,    p.g23};
  for (double v : fields) {
    if (!std::isfinite(v)) throw ValidationError("non-finite parameter in " + to_string(p));
  }
  if (p.g12 < 0.0 || p.g13 < 0.0 || p.g23 < 0.0)
    throw ValidationError("coupling strengths must be non-negative: " + to_string(p));
  if (!(p.kappa2 > 0.0)) throw ValidationError("kappa2 must be positive (cavity 2 is lossy)");
}

ComplexMatrix3 build_matrix(const SystemParams& p) {
  validate(p);
  ComplexMatrix3 h;
  h(0, 0) = {p.omega1, -p.kappa1};
  h(1, 1) = {p.omega2, -p.kappa2};
  h(2, 2) = {p.omega3, -p.kappa3};
  h(0, 1) = h(1, 0) = p.g12;
  h(0, 2) = h(2, 0) = p.g13;
  h(1, 2) = h(2, 1) = p.g23;
  return h;
}

Detunings detunings(const SystemParams& p) {
  validate(p);
  return {p.omega1 - p.omega3, p.omega2 - p.omega3};
}

SystemParams normalize(const SystemParams& p) {
  validate(p);
  const double s = p.kappa2;
  SystemParams n;
  n.omega1 = (p.omega1 - p.omega3) / s;
  n.omega2 = (p.omega2 - p.omega3) / s;
  n.omega3 = 0.0;
  n.kappa1 = p.kappa1 / s;
  n.kappa2 = 1.0;
  n.kappa3 = p.kappa3 / s;
  n.g12 = p.g12 / s;
  n.g13 = p.g13 / s;
  n.g23 = p.g23 / s;
  return n;
}

SystemParams with_detunings(SystemParams p, double delta1, double delta2) {
  p.omega1 = p.omega3 + delta1;
  p.omega2 = p.omega3 + delta2;
  return p;
}

std::string to_string(const SystemParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "{omega=(" << p.omega1 << ", " << p.omega2 << ", " << p.omega3 << "), kappa=(" << p.kappa1
     << ", " << p.kappa2 << ", " << p.kappa3 << "), g12=" << p.g12 << ", g13=" << p.g13
     << ", g23=" << p.g23 << "}";
  return os.str();
}

}  // namespace epsurf
