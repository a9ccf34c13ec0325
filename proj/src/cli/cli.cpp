#include "epsurf/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include "epsurf/exceptional.hpp"
#include "epsurf/model.hpp"
#include "epsurf/pseudoherm.hpp"
#include "epsurf/spectrum.hpp"
#include "table.hpp"

namespace epsurf::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kOutputDirEnv = "EPSURF_OUTPUT_DIR";

struct RunConfig {
  std::string command;
  SystemParams params;  // input units
  std::optional<double> delta1, delta2;
  std::string mode{"none"};
  std::string branch{"+"};
  std::string axis;
  double lo{0.0}, hi{0.0};
  int steps{201};
  int grid{512};
  double ep_tol{1e-8};
  double bisect_tol{1e-10};
  double ph_tol{1e-9};
  int samples{100};
  double kappa1_ratio{0.0};
  bool numeric{false};
  double k1_lo{0.0}, k1_hi{3.0};
  int slices{31};
  std::string out;
  std::string format{"csv"};
  bool raw_units{false};
  unsigned threads{std::max(1u, std::thread::hardware_concurrency())};
  std::string freq_units{"1"};
  std::string rate_units{"1"};
};

double unit_factor(const std::string& u) {
  static const std::map<std::string, double> factors{
      {"1", 1.0}, {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  const auto it = factors.find(u);
  if (it == factors.end()) throw ValidationError("unknown unit '" + u + "'");
  return it->second;
}

bool is_frequency_axis(Axis a) { return a == Axis::Omega1 || a == Axis::Omega2 || a == Axis::Omega3; }

// Maps library quantities (base units) to output units.
struct Units {
  double freq_factor{1.0};
  double rate_factor{1.0};
  bool raw{false};

  double lambda_re(const SystemParams& p, double re) const {
    return raw ? re / rate_factor : (re - p.omega3) / p.kappa2;
  }
  double lambda_im(const SystemParams& p, double im) const {
    return raw ? im / rate_factor : im / p.kappa2;
  }
  double rate(const SystemParams& p, double v) const { return raw ? v / rate_factor : v / p.kappa2; }
  double axis(const SystemParams& base, Axis a, double v) const {
    if (raw || a == Axis::Omega3 || a == Axis::Kappa2)
      return v / (is_frequency_axis(a) ? freq_factor : rate_factor);
    if (a == Axis::Omega1 || a == Axis::Omega2) return (v - base.omega3) / base.kappa2;
    return v / base.kappa2;
  }
  double axis_to_base(Axis a, double v) const { return v * (is_frequency_axis(a) ? freq_factor : rate_factor); }
};

struct Resolved {
  SystemParams params;  // base units
  ConstraintMode mode;
  Branch branch;
  Units units;
};

Resolved resolve(const RunConfig& cfg) {
  Resolved r;
  r.units.freq_factor = unit_factor(cfg.freq_units);
  r.units.rate_factor = unit_factor(cfg.rate_units);
  r.units.raw = cfg.raw_units;
  const double ff = r.units.freq_factor, rf = r.units.rate_factor;
  SystemParams p = cfg.params;
  p.omega1 *= ff;
  p.omega2 *= ff;
  p.omega3 *= ff;
  if (cfg.delta1) p.omega1 = p.omega3 + *cfg.delta1 * rf;
  if (cfg.delta2) p.omega2 = p.omega3 + *cfg.delta2 * rf;
  p.kappa1 *= rf;
  p.kappa2 *= rf;
  p.kappa3 *= rf;
  p.g12 *= rf;
  p.g13 *= rf;
  p.g23 *= rf;
  r.params = p;
  const auto mode = parse_constraint_mode(cfg.mode);
  if (!mode) throw ValidationError("unknown constraint mode '" + cfg.mode + "'");
  r.mode = *mode;
  if (cfg.branch == "+" || cfg.branch == "plus") r.branch = Branch::Plus;
  else if (cfg.branch == "-" || cfg.branch == "minus") r.branch = Branch::Minus;
  else throw ValidationError("branch must be + or -");
  return r;
}

json params_json(const SystemParams& p) {
  return json{{"omega1", p.omega1}, {"omega2", p.omega2}, {"omega3", p.omega3},
              {"kappa1", p.kappa1}, {"kappa2", p.kappa2}, {"kappa3", p.kappa3},
              {"g12", p.g12},       {"g13", p.g13},       {"g23", p.g23}};
}

json config_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["mode"] = cfg.mode;
  j["branch"] = cfg.branch;
  j["params"] = params_json(cfg.params);
  if (cfg.delta1) j["delta1"] = *cfg.delta1;
  if (cfg.delta2) j["delta2"] = *cfg.delta2;
  if (cfg.command == "sweep" || cfg.command == "ep-find") {
    j["axis"] = cfg.axis;
    j["lo"] = cfg.lo;
    j["hi"] = cfg.hi;
  }
  if (cfg.command == "sweep") j["steps"] = cfg.steps;
  if (cfg.command == "ep-find") {
    j["grid"] = cfg.grid;
    j["ep_tol"] = cfg.ep_tol;
    j["bisect_tol"] = cfg.bisect_tol;
  }
  if (cfg.command == "el3") {
    j["kappa1_ratio"] = cfg.kappa1_ratio;
    j["numeric"] = cfg.numeric;
    j["samples"] = cfg.samples;
  }
  if (cfg.command == "es3") {
    j["k1_lo"] = cfg.k1_lo;
    j["k1_hi"] = cfg.k1_hi;
    j["slices"] = cfg.slices;
    j["samples"] = cfg.samples;
  }
  j["raw_units"] = cfg.raw_units;
  j["freq_units"] = cfg.freq_units;
  j["rate_units"] = cfg.rate_units;
  return j;
}

struct Output {
  Table table;
  json diagnostics = json::object();
  int code{kOk};
};

// ---------------------------------------------------------------------------

Output cmd_check(const RunConfig& cfg, const Resolved& r) {
  Output o;
  o.table.columns = {"mode",   "r1",     "r2",          "r3",       "max_residual",
                     "pseudo_hermitian", "feasible",    "kappa3",   "delta1",
                     "delta2", "delta1_free", "radicand"};
  const ConstrainedParams cp = apply_constraint(r.params, r.mode, r.branch);
  const SystemParams& p = cp.params;
  const ConstraintResiduals res = ph_residuals(p);
  const bool ph = cp.feasible && res.max_abs() <= cfg.ph_tol;
  const bool solved = r.mode != ConstraintMode::None;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double radicand = (solved && r.mode != ConstraintMode::PT && !cp.delta1_free)
                              ? cp.radicand / (p.kappa2 * p.kappa2)
                              : nan;
  o.table.add({std::string(to_string(r.mode)), res.r1, res.r2, res.r3, res.max_abs(), ph,
               cp.feasible, r.units.rate(p, p.kappa3),
               cp.feasible ? r.units.rate(p, p.omega1 - p.omega3) : nan,
               cp.feasible ? r.units.rate(p, p.omega2 - p.omega3) : nan, cp.delta1_free, radicand});
  if (!cp.feasible) o.diagnostics["reason"] = cp.reason;
  o.code = ph ? kOk : kInfeasible;
  return o;
}

Output cmd_eigs(const RunConfig&, const Resolved& r) {
  Output o;
  o.table.columns = {"re_plus", "im_plus",        "re_minus", "im_minus", "re_zero", "im_zero",
                     "classification", "Delta", "A",        "B",        "oracle_max_dev"};
  const ConstrainedParams cp = apply_constraint(r.params, r.mode, r.branch);
  if (!cp.feasible) {
    o.diagnostics["reason"] = cp.reason;
    o.code = kInfeasible;
    return o;
  }
  const SystemParams& p = cp.params;
  const SystemParams n = normalize(p);
  const EigenTriple t = eigenvalues(p);
  const EigenTriple tn = t.shifted(-p.omega3, 1.0).shifted(0.0, 1.0 / p.kappa2);
  const double dev = multiset_distance(tn.values(), eigensolve_oracle(build_matrix(n)));
  double A = std::numeric_limits<double>::quiet_NaN(), B = A, Delta = A;
  if (is_pseudo_hermitian(n, 1e-9)) {
    const DiscriminantSet ds = discriminants(cubic_coeffs_reduced(n));
    A = ds.A;
    B = ds.B;
    Delta = ds.Delta;
  }
  const auto& u = r.units;
  o.table.add({u.lambda_re(p, t.lambda_plus.real()), u.lambda_im(p, t.lambda_plus.imag()),
               u.lambda_re(p, t.lambda_minus.real()), u.lambda_im(p, t.lambda_minus.imag()),
               u.lambda_re(p, t.lambda_zero.real()), u.lambda_im(p, t.lambda_zero.imag()),
               std::string(to_string(t.classification)), Delta, A, B, dev});
  o.diagnostics["oracle_max_dev"] = dev;
  return o;
}

Output cmd_sweep(const RunConfig& cfg, const Resolved& r) {
  if (cfg.axis.empty()) throw ValidationError("sweep requires --axis");
  const Axis axis = parse_axis(cfg.axis);
  Output o;
  o.table.columns = {"axis",    "re_plus", "im_plus",        "re_minus", "im_minus",
                     "re_zero", "im_zero", "classification", "excluded", "reason"};
  SweepOptions opts;
  opts.constraint = r.mode;
  opts.branch = r.branch;
  opts.threads = cfg.threads;
  const auto rows = spectrum_sweep(r.params, axis, r.units.axis_to_base(axis, cfg.lo),
                                   r.units.axis_to_base(axis, cfg.hi), cfg.steps, opts);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::int64_t excluded = 0;
  const auto& u = r.units;
  for (const auto& row : rows) {
    const double ax = u.axis(r.params, axis, row.axis_value);
    if (row.excluded) {
      ++excluded;
      o.table.add({ax, nan, nan, nan, nan, nan, nan, std::string("EXCLUDED"), true, row.reason});
      continue;
    }
    const auto& p = row.params;
    const auto& e = row.eigs;
    o.table.add({ax, u.lambda_re(p, e.lambda_plus.real()), u.lambda_im(p, e.lambda_plus.imag()),
                 u.lambda_re(p, e.lambda_minus.real()), u.lambda_im(p, e.lambda_minus.imag()),
                 u.lambda_re(p, e.lambda_zero.real()), u.lambda_im(p, e.lambda_zero.imag()),
                 std::string(to_string(e.classification)), false, std::string()});
  }
  o.diagnostics["rows"] = static_cast<std::int64_t>(rows.size());
  o.diagnostics["excluded"] = excluded;
  return o;
}

Output cmd_epfind(const RunConfig& cfg, const Resolved& r) {
  if (cfg.axis.empty()) throw ValidationError("ep-find requires --axis");
  const Axis axis = parse_axis(cfg.axis);
  EpSearchOptions opts;
  opts.grid = cfg.grid;
  opts.ep_tol = cfg.ep_tol;
  opts.bisect_tol = cfg.bisect_tol;
  opts.branch = r.branch;
  const auto res = find_ep_along_axis(r.params, axis, r.units.axis_to_base(axis, cfg.lo),
                                      r.units.axis_to_base(axis, cfg.hi), r.mode, opts);
  Output o;
  o.table.columns = {"order",  "axis",   "re_lambda", "im_lambda", "A",   "B",   "Delta",
                     "kappa1", "kappa3", "delta1",    "delta2",    "g12", "g13", "g23"};
  for (const auto& ep : res.points) {
    const auto& p = ep.params;
    o.table.add({static_cast<std::int64_t>(ep.order), r.units.axis(r.params, axis, ep.axis_value),
                 ep.lambda.real(), ep.lambda.imag(), ep.A, ep.B, ep.Delta, p.kappa1, p.kappa3,
                 p.omega1 - p.omega3, p.omega2 - p.omega3, p.g12, p.g13, p.g23});
  }
  json edges = json::array();
  for (const auto& e : res.edges)
    edges.push_back({{"axis", r.units.axis(r.params, axis, e.axis_value)}, {"entering", e.entering}});
  o.diagnostics["feasibility_edges"] = edges;
  o.code = res.points.empty() ? kEmpty : kOk;
  return o;
}

Output mesh_output(const ManifoldMesh& mesh) {
  Output o;
  o.table.columns = {"slice",  "kappa1",  "g13",       "g23",       "g12", "delta1", "delta2",
                     "re_lambda", "im_lambda", "A", "B", "e1", "e2"};
  json footprints = json::array();
  double worst = 0.0;
  for (std::size_t s = 0; s < mesh.slices.size(); ++s) {
    const auto& slice = mesh.slices[s];
    footprints.push_back({{"slice", static_cast<std::int64_t>(s)},
                          {"kappa1", slice.kappa1},
                          {"g13_lo", slice.footprint_lo},
                          {"g13_hi", slice.footprint_hi},
                          {"samples", static_cast<std::int64_t>(slice.samples.size())}});
    for (const auto& smp : slice.samples) {
      const auto& p = smp.ep.params;
      const Ep3Residuals e = ep3_residuals(p);
      worst = std::max({worst, std::abs(smp.ep.A), std::abs(smp.ep.B)});
      o.table.add({static_cast<std::int64_t>(s), slice.kappa1, smp.g13, smp.g23, p.g12,
                   p.omega1 - p.omega3, p.omega2 - p.omega3, smp.ep.lambda.real(),
                   smp.ep.lambda.imag(), smp.ep.A, smp.ep.B, e.e1, e.e2});
    }
  }
  o.diagnostics["convention"] = mesh.convention;
  o.diagnostics["slices"] = footprints;
  o.diagnostics["max_abs_AB"] = worst;
  o.code = o.table.rows.empty() ? kEmpty : kOk;
  return o;
}

Output cmd_el3(const RunConfig& cfg, const Resolved&) {
  const bool closed_form = cfg.kappa1_ratio == 0.0 && !cfg.numeric;
  return mesh_output(closed_form ? el3_pt(cfg.samples) : el3_general(cfg.kappa1_ratio, cfg.samples));
}

Output cmd_es3(const RunConfig& cfg, const Resolved&) {
  return mesh_output(es3_scan(cfg.k1_lo, cfg.k1_hi, cfg.slices, cfg.samples, cfg.threads));
}

void emit(const RunConfig& cfg, const Output& o, std::ostream& out, std::ostream& err) {
  std::string path = cfg.out;
  if (path.empty()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0')
      path = (std::filesystem::path(dir) / (cfg.command + "." + cfg.format)).string();
  }
  auto write = [&](std::ostream& os) {
    if (cfg.format == "json") write_json(os, config_json(cfg), o.table, o.diagnostics);
    else write_csv(os, o.table);
  };
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open output file '" + path + "'");
  write(f);
  out << cfg.command << ": " << o.table.rows.size() << " row(s) written to " << path << '\n';
  (void)err;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Exceptional-point structure of three coupled gain/loss cavities", "epsurf"};
  app.set_config("--config", "", "key=value parameter file; command-line flags take precedence");
  app.require_subcommand(1, 1);

  auto& p = cfg.params;
  app.add_option("--omega1", p.omega1, "cavity 1 frequency");
  app.add_option("--omega2", p.omega2, "cavity 2 frequency");
  app.add_option("--omega3", p.omega3, "cavity 3 (reference) frequency");
  app.add_option("--delta1", cfg.delta1, "omega1 - omega3 (overrides --omega1), rate units");
  app.add_option("--delta2", cfg.delta2, "omega2 - omega3 (overrides --omega2), rate units");
  app.add_option("--kappa1", p.kappa1, "loss (+) / gain (-) rate of cavity 1");
  app.add_option("--kappa2", p.kappa2, "loss rate of cavity 2 (> 0)");
  app.add_option("--kappa3", p.kappa3, "loss (+) / gain (-) rate of cavity 3");
  app.add_option("--g12", p.g12, "coupling 1-2");
  app.add_option("--g13", p.g13, "coupling 1-3");
  app.add_option("--g23", p.g23, "coupling 2-3");
  app.add_option("--mode", cfg.mode, "constraint mode: none|pt|ph-symmetric|ph-asymmetric|ph-general");
  app.add_option("--branch", cfg.branch, "sign of the delta2 root: + or -");
  app.add_option("--axis", cfg.axis, "swept parameter name");
  app.add_option("--lo", cfg.lo, "axis lower bound");
  app.add_option("--hi", cfg.hi, "axis upper bound");
  app.add_option("--steps", cfg.steps, "sweep rows")->check(CLI::Range(2, 100000000));
  app.add_option("--grid", cfg.grid, "EP search grid points")->check(CLI::Range(2, 100000000));
  app.add_option("--ep-tol", cfg.ep_tol, "|A|,|B| bound for EP3 classification")->check(CLI::PositiveNumber);
  app.add_option("--bisect-tol", cfg.bisect_tol, "bisection interval width")->check(CLI::PositiveNumber);
  app.add_option("--ph-tol", cfg.ph_tol, "residual bound for the pseudo-Hermiticity check")->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "samples per exceptional line")->check(CLI::Range(2, 100000000));
  app.add_option("--kappa1-ratio", cfg.kappa1_ratio, "kappa1/kappa2 of the exceptional line");
  app.add_flag("--numeric", cfg.numeric, "use the numerical solver also at kappa1 = 0");
  app.add_option("--k1-lo", cfg.k1_lo, "lowest kappa1/kappa2 of the surface scan");
  app.add_option("--k1-hi", cfg.k1_hi, "highest kappa1/kappa2 of the surface scan");
  app.add_option("--slices", cfg.slices, "kappa1 slices of the surface scan")->check(CLI::Range(2, 100000000));
  app.add_option("-o,--out", cfg.out, std::string("output file (default: stdout, or $") + kOutputDirEnv + "/<command>.<format>)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--raw-units", cfg.raw_units, "report input units instead of (lambda - omega3)/kappa2");
  app.add_option("--threads", cfg.threads, "worker threads")->check(CLI::Range(1u, 4096u));
  app.add_option("--freq-units", cfg.freq_units, "unit of omega inputs: 1|Hz|kHz|MHz|GHz");
  app.add_option("--rate-units", cfg.rate_units, "unit of kappa, g, delta inputs: 1|Hz|kHz|MHz|GHz");

  const std::pair<const char*, const char*> commands[] = {
      {"check", "pseudo-Hermiticity residuals, or solve the constraint of --mode"},
      {"eigs", "eigenvalue branches, discriminants and oracle cross-check"},
      {"sweep", "spectrum along one axis"},
      {"ep-find", "locate EP2/EP3 along one axis"},
      {"el3", "third-order exceptional line at fixed kappa1/kappa2"},
      {"es3", "third-order exceptional surface over kappa1/kappa2"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&cfg, n = std::string(name)] { cfg.command = n; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const Resolved r = resolve(cfg);
    validate(r.params);
    Output o;
    if (cfg.command == "check") o = cmd_check(cfg, r);
    else if (cfg.command == "eigs") o = cmd_eigs(cfg, r);
    else if (cfg.command == "sweep") o = cmd_sweep(cfg, r);
    else if (cfg.command == "ep-find") o = cmd_epfind(cfg, r);
    else if (cfg.command == "el3") o = cmd_el3(cfg, r);
    else o = cmd_es3(cfg, r);
    emit(cfg, o, out, err);
    if (o.code == kInfeasible && o.diagnostics.contains("reason"))
      err << cfg.command << ": " << o.diagnostics["reason"].get<std::string>() << '\n';
    return o.code;
  } catch (const std::exception& e) {
    err << "epsurf " << cfg.command << ": " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace epsurf::cli
