#include "ucplab/scenario.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/geometry.hpp"
#include "ucplab/heat_control.hpp"
#include "ucplab/lifting.hpp"
#include "ucplab/parallel.hpp"
#include "ucplab/random_models.hpp"
#include "ucplab/rng.hpp"
#include "ucplab/spectral.hpp"
#include "ucplab/ucp.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace ucplab {

namespace {

using nlohmann::json;

constexpr std::uint64_t kStreamPotential = 0x907e;
constexpr std::uint64_t kStreamInitial = 0x1417;
constexpr std::uint64_t kStreamRealization = 0x3e6e7;  // same stream wegner_sweep uses
constexpr const char* kSeedRule =
    "derive_seed(master, stream, index) = mix64(mix64(mix64(master) ^ stream) ^ index), "
    "mix64 = SplitMix64 finalizer; lattice quantities use site_seed(master, stream, j)";

// ---- field access with JSON-pointer style diagnostics ----

std::string join(const std::string& base, const std::string& key) { return base + "/" + key; }

const json& require(const json& obj, const std::string& key, const std::string& base) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing field " + join(base, key));
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("field " + path + ": expected a number");
  return v.get<double>();
}

double number(const json& obj, const std::string& key, const std::string& base) {
  return as_number(require(obj, key, base), join(base, key));
}

double number_or(const json& obj, const std::string& key, const std::string& base, double fallback) {
  return obj.contains(key) ? number(obj, key, base) : fallback;
}

int integer_or(const json& obj, const std::string& key, const std::string& base, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("field " + join(base, key) + ": expected an integer");
  return v.get<int>();
}

std::string string_or(const json& obj, const std::string& key, const std::string& base, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("field " + join(base, key) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> sweep(const json& obj, const std::string& key, const std::string& base) {
  const auto& v = require(obj, key, base);
  const auto path = join(base, key);
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "/" + std::to_string(i)));
  } else {
    out.push_back(as_number(v, path));
  }
  if (out.empty()) throw ConfigError("field " + path + ": sweep is empty");
  return out;
}

double scalar_or_first(const json& obj, const std::string& key, const std::string& base) {
  const auto& v = require(obj, key, base);
  if (v.is_array()) {
    if (v.size() != 1) throw ConfigError("field " + join(base, key) + ": expected a single value");
    return as_number(v[0], join(base, key) + "/0");
  }
  return as_number(v, join(base, key));
}

// ---- shared builders ----

struct Discretization {
  int dim = 1;
  int points_per_unit = 20;
  Boundary bc = Boundary::Dirichlet;
  std::size_t node_cap = kDefaultNodeCap;
};

Discretization discretization(const json& p) {
  Discretization d;
  d.dim = integer_or(p, "dim", "", 1);
  if (d.dim < 1 || d.dim > 3) throw ConfigError("field /dim: must be 1, 2 or 3");
  d.points_per_unit = integer_or(p, "points_per_unit", "", 20);
  if (d.points_per_unit < 1) throw ConfigError("field /points_per_unit: must be positive");
  const auto bc = string_or(p, "boundary", "", "dirichlet");
  if (bc == "dirichlet") d.bc = Boundary::Dirichlet;
  else if (bc == "neumann") d.bc = Boundary::Neumann;
  else throw ConfigError("field /boundary: expected \"dirichlet\" or \"neumann\"");
  d.node_cap = static_cast<std::size_t>(integer_or(p, "node_cap", "", static_cast<int>(kDefaultNodeCap)));
  return d;
}

SingleSiteMeasure measure_from(const json& m, const std::string& base) {
  const auto kind = string_or(m, "kind", base, "uniform");
  const double lo = number(m, "omega_minus", base);
  const double hi = number(m, "omega_plus", base);
  SingleSiteMeasure out = SingleSiteMeasure::uniform(lo, hi);
  if (kind == "beta") {
    out = SingleSiteMeasure::beta(lo, hi, number(m, "alpha", base), number(m, "beta", base));
  } else if (kind == "table") {
    const auto& w = require(m, "weights", base);
    if (!w.is_array()) throw ConfigError("field " + join(base, "weights") + ": expected an array");
    out = SingleSiteMeasure::table(lo, hi, w.get<std::vector<double>>());
  } else if (kind != "uniform") {
    throw ConfigError("field " + join(base, "kind") + ": unknown measure kind \"" + kind + "\"");
  }
  if (m.contains("nu_sup")) out.declare_density_sup(number(m, "nu_sup", base));
  return out;
}

Potential potential_from(const json& p, const Grid& grid, const Discretization& disc, double L,
                         std::uint64_t seed) {
  if (!p.contains("potential")) return Potential::zero(grid.size());
  const auto& v = p.at("potential");
  const std::string base = "/potential";
  const auto type = string_or(v, "type", base, "zero");
  if (type == "zero") return Potential::zero(grid.size());
  if (type == "constant") return Potential::constant(grid.size(), number(v, "value", base));
  if (type == "random_uniform") {
    const double lo = number(v, "min", base), hi = number(v, "max", base);
    Rng rng(derive_seed(seed, kStreamPotential, 0));
    Eigen::VectorXd vals(static_cast<Eigen::Index>(grid.size()));
    for (auto& x : vals) x = rng.uniform(lo, hi);
    return Potential(vals);
  }
  if (type == "periodic_cos") {
    // A prod_i cos^2(pi x_i / period): one bump per lattice cell.
    const double a = number(v, "amplitude", base);
    const double period = number_or(v, "period", base, 1.0);
    return Potential::sample(grid, [a, period](const Point& x) {
      double val = a;
      for (Eigen::Index i = 0; i < x.size(); ++i) val *= std::pow(std::cos(std::numbers::pi * x(i) / period), 2);
      return val;
    });
  }
  if (type == "breather") {
    const auto measure = measure_from(require(v, "measure", base), base + "/measure");
    auto r = sample_breather(measure, L, disc.dim, disc.points_per_unit, disc.bc, seed);
    return r.potential;
  }
  throw ConfigError("field /potential/type: unknown potential type \"" + type + "\"");
}

struct Instance {
  double L = 0.0;
  std::shared_ptr<const Grid> grid;
  Potential potential;
  SpectralData spec;
};

Instance make_instance(const json& p, const Discretization& disc, double L, std::uint64_t seed) {
  Instance inst;
  inst.L = L;
  inst.grid = box_grid(L, disc.dim, disc.points_per_unit, disc.bc, disc.node_cap);
  inst.potential = potential_from(p, *inst.grid, disc, L, seed);
  inst.spec = eigendecompose(assemble_hamiltonian(inst.grid, inst.potential));
  return inst;
}

EquidistributedSequence observation_points(const json& p, const BoxDomain& domain, double G, double delta,
                                           std::uint64_t seed) {
  const auto mode = string_or(p, "observation", "", "random");
  if (mode == "random") return sample_equidistributed(G, delta, domain, seed);
  if (mode == "centered") return centered_equidistributed(G, delta, domain);
  throw ConfigError("field /observation: expected \"random\" or \"centered\"");
}

double delta_checked(double G, double delta, const std::string& path) {
  if (!(G > 0)) throw ConfigError("field /G: must be positive");
  if (!(delta > 0 && delta < G / 2)) throw ConfigError("field " + path + ": delta not in (0, G/2)");
  return delta;
}

void append_warnings(std::vector<std::string>& findings, const std::vector<std::string>& warnings,
                     const std::string& prefix) {
  for (const auto& w : warnings) findings.push_back(prefix + w);
}

// ---- experiments ----

ScenarioOutput run_ucp(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const auto Ls = sweep(p, "L", "");
  const auto Es = sweep(p, "E", "");
  const double G = number_or(p, "G", "", 1.0);
  const double delta = delta_checked(G, number(p, "delta", ""), "/delta");
  const double N = number_or(p, "N", "", kDefaultUcpN);
  if (!(N > 0)) throw ConfigError("field /N: must be positive");

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "ucp";
  t.columns = {"L", "G", "delta", "E", "N", "C_uc", "ratio", "satisfied"};
  t.units = {"length", "length", "length", "energy", "1", "1", "1", "bool"};
  std::vector<Instance> instances(Ls.size());
  parallel_for(Ls.size(), cfg.threads, [&](std::size_t i) { instances[i] = make_instance(p, disc, Ls[i], cfg.seed); });
  json per_l = json::array();
  for (const auto& inst : instances) {
    const auto z = observation_points(p, inst.grid->domain(), G, delta, cfg.seed);
    const auto mask = observation_mask(*inst.grid, z);
    append_warnings(out.findings, mask.warnings, "L=" + format_number(inst.L) + ": ");
    per_l.push_back({{"L", inst.L}, {"covered_fraction", mask.covered_fraction}, {"nodes", inst.grid->size()}});
    for (double E : Es) {
      if (subspace_dimension(inst.spec, E) == 0)
        throw ConfigError("field /E: energy " + format_number(E) + " lies below the ground state at L=" +
                          format_number(inst.L));
      const auto r = verify_ucp_instance(inst.spec, inst.potential, mask, {N, G, delta, E});
      t.add_row({inst.L, G, delta, E, N, r.cuc, r.ratio, r.satisfied});
      if (!r.satisfied)
        out.findings.push_back("bound violated at L=" + format_number(inst.L) + ", E=" + format_number(E) +
                               ": ratio " + format_number(r.ratio) + " < C_uc " + format_number(r.cuc));
    }
  }
  t.summary = {{"instances", per_l}, {"note", "N is a configured constant, not a derived value"}};
  return out;
}

ScenarioOutput run_estimate_n(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const auto Ls = sweep(p, "L", "");
  const auto Es = sweep(p, "E", "");
  const double G = number_or(p, "G", "", 1.0);
  const double delta = delta_checked(G, number(p, "delta", ""), "/delta");

  std::vector<Instance> instances(Ls.size());
  parallel_for(Ls.size(), cfg.threads, [&](std::size_t i) { instances[i] = make_instance(p, disc, Ls[i], cfg.seed); });
  std::vector<ObservationMask> masks;
  for (const auto& inst : instances)
    masks.push_back(observation_mask(*inst.grid, observation_points(p, inst.grid->domain(), G, delta, cfg.seed)));

  std::vector<UcpInstance> list;
  std::vector<std::pair<double, double>> labels;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (double E : Es) {
      if (subspace_dimension(instances[i].spec, E) == 0)
        throw ConfigError("field /E: energy " + format_number(E) + " lies below the ground state");
      list.push_back({&instances[i].spec, &instances[i].potential, &masks[i], E, G, delta});
      labels.emplace_back(instances[i].L, E);
    }
  }
  const NEstimate est = estimate_n_empirical(list);

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "estimate-N";
  t.columns = {"L", "G", "delta", "E", "ratio", "g_star", "N_inst"};
  t.units = {"length", "length", "length", "energy", "1", "1", "1"};
  json distribution = json::array();
  for (std::size_t k = 0; k < list.size(); ++k) {
    const double n = est.per_instance[k].value_or(std::numeric_limits<double>::quiet_NaN());
    t.add_row({labels[k].first, G, delta, labels[k].second, est.ratios[k], est.exponents[k], n});
    distribution.push_back(format_number(n));
  }
  t.summary = {{"N_hat", est.n_hat}, {"diagnostics", est.diagnostics}};
  append_warnings(out.findings, est.diagnostics, "");
  return out;
}

ScenarioOutput run_lifting(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const double L = scalar_or_first(p, "L", "");
  const double G = number_or(p, "G", "", 1.0);
  const double delta = delta_checked(G, number(p, "delta", ""), "/delta");
  const double N = number_or(p, "N", "", kDefaultUcpN);
  const int samples = integer_or(p, "t_samples", "", 21);
  const double fraction = number_or(p, "t_fraction", "", 0.9);
  if (samples < 2) throw ConfigError("field /t_samples: need at least 2 samples");
  if (!(fraction > 0 && fraction < 1)) throw ConfigError("field /t_fraction: must lie in (0, 1)");

  auto grid = box_grid(L, disc.dim, disc.points_per_unit, disc.bc, disc.node_cap);
  const Potential v = potential_from(p, *grid, disc, L, cfg.seed);
  const Hamiltonian h = assemble_hamiltonian(grid, v);
  const auto mask = observation_mask(*grid, observation_points(p, grid->domain(), G, delta, cfg.seed));

  json wspec = p.value("W", json{{"type", "mask"}, {"theta", 1.0}});
  const auto wtype = string_or(wspec, "type", "/W", "mask");
  Potential w;
  if (wtype == "mask") {
    w = Potential(mask.weights * number_or(wspec, "theta", "/W", 1.0));
  } else if (wtype == "constant") {
    w = Potential::constant(grid->size(), number(wspec, "value", "/W"));
  } else {
    throw ConfigError("field /W/type: expected \"mask\" or \"constant\"");
  }
  if (!(w.sup_norm() > 0)) throw ConfigError("field /W: perturbation vanishes on the grid");
  const double theta = lift_theta(w, mask);

  const json gspec = p.value("gap", json::object());
  const double min_width = number_or(gspec, "min_width", "/gap", 2.0);
  const auto gaps = find_gaps(eigenvalues_only(h), min_width);
  if (gaps.empty()) throw ConfigError("field /gap/min_width: no spectral gap of that width");
  // Gaps are ordered by energy; the lowest one is the least affected by the grid.
  const int which = integer_or(gspec, "index", "/gap", 0);
  if (which < 0 || static_cast<std::size_t>(which) >= gaps.size())
    throw ConfigError("field /gap/index: out of range");
  const GapSpec gap = gaps[static_cast<std::size_t>(which)];

  const double t0 = gap.t0(w.sup_norm());
  std::vector<double> ts;
  for (int k = 0; k < samples; ++k) ts.push_back(fraction * t0 * (-1.0 + 2.0 * k / (samples - 1)));
  const LiftCurve curve = lift_curve(h, w, gap, ts, cfg.threads);
  const double csup = cuc_sup(v, w, gap.b, G, delta, N);

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "lifting";
  t.columns = {"t", "f_minus", "f_plus", "lower_bound", "upper_bound", "margin_lo", "margin_hi"};
  t.units = {"1", "energy", "energy", "energy", "energy", "energy", "energy"};
  LipschitzReport report;
  if (theta > 0) {
    report = check_lipschitz(curve, theta, csup);
  } else {
    out.findings.push_back("W vanishes somewhere on the observation set: theta = 0, lower bound not checked");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double lower = nan, upper = nan, mlo = nan, mhi = nan;
    for (const auto& row : report.rows) {
      if (row.t == ts[k]) {
        lower = row.lower;
        upper = row.upper;
        mlo = row.margin_lo;
        mhi = row.margin_hi;
      }
    }
    t.add_row({ts[k], curve.f_minus[k], curve.f_plus[k], lower, upper, mlo, mhi});
  }
  append_warnings(out.findings, report.violations, "");
  t.summary = {{"a", gap.a},
               {"b", gap.b},
               {"t0", t0},
               {"theta", theta},
               {"W_sup", w.sup_norm()},
               {"cuc_sup", csup},
               {"N", N},
               {"lower_ok", report.lower_ok},
               {"upper_ok", report.upper_ok},
               {"note", "discrete surrogate for the essential spectrum: f_-, f_+ are evaluated on the "
                        "full discrete spectrum of the finite box"}};
  return out;
}

RandomModel model_from(const json& p, const Discretization& disc) {
  RandomModel m;
  m.dim = disc.dim;
  m.points_per_unit = disc.points_per_unit;
  m.bc = disc.bc;
  const auto& spec = require(p, "model", "");
  const auto kind = string_or(spec, "kind", "/model", "breather");
  m.measure = measure_from(require(spec, "measure", "/model"), "/model/measure");
  if (kind == "breather") {
    m.kind = RandomModel::Kind::Breather;
  } else if (kind == "alloy") {
    m.kind = RandomModel::Kind::Alloy;
    const json bump = spec.value("bump", json::object());
    const auto shape = string_or(bump, "shape", "/model/bump", "ball");
    if (shape != "ball" && shape != "hat") throw ConfigError("field /model/bump/shape: expected \"ball\" or \"hat\"");
    m.bump.shape = shape == "ball" ? Bump::Shape::Ball : Bump::Shape::Hat;
    m.bump.radius = number_or(bump, "radius", "/model/bump", 0.25);
    m.bump.amplitude = number_or(bump, "amplitude", "/model/bump", 1.0);
    m.background_amplitude = number_or(spec, "background_amplitude", "/model", 0.0);
  } else {
    throw ConfigError("field /model/kind: expected \"breather\" or \"alloy\"");
  }
  return m;
}

ScenarioOutput run_wegner(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const RandomModel model = model_from(p, disc);
  const auto Ls = sweep(p, "L", "");
  const double E = scalar_or_first(p, "E", "");
  const auto eps = sweep(p, "epsilon", "");
  const int samples = integer_or(p, "samples", "", 100);
  WegnerBoundParams bound;
  bound.N = number_or(p, "N", "", kDefaultUcpN);
  bound.C = number_or(p, "C", "", 1.0);
  if (p.contains("E0")) bound.E0 = number(p, "E0", "");
  if (samples < 2) throw ConfigError("field /samples: need at least 2 samples");

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "wegner";
  t.columns = {"epsilon", "L", "mean", "stderr", "bound", "ratio"};
  t.units = {"energy", "length", "count", "count", "count", "1"};
  json realizations = json::array();
  json fits = json::array();
  for (double L : Ls) {
    const auto est = wegner_sweep(model, L, E, eps, static_cast<std::size_t>(samples), cfg.seed, bound, cfg.force,
                                  cfg.threads);
    std::vector<std::pair<double, double>> pts;
    for (const auto& w : est) {
      t.add_row({w.eps, w.L, w.mean, w.stderr_mean, w.bound, w.mean / w.bound});
      pts.emplace_back(w.eps, w.mean);
    }
    try {
      const auto fit = fit_wegner_exponent(pts, disc.dim);
      fits.push_back({{"L", L}, {"slope", fit.slope}, {"residual", fit.residual}, {"used", fit.used},
                      {"diagnostics", fit.diagnostics}});
    } catch (const ConfigError& e) {
      fits.push_back({{"L", L}, {"skipped", e.what()}});
    }
    // Realization 0 of the sweep, reproducible from the manifest seed.
    const auto seed0 = derive_seed(cfg.seed, kStreamRealization, 0);
    if (model.kind == RandomModel::Kind::Breather) {
      realizations.push_back(sample_breather(model.measure, L, disc.dim, disc.points_per_unit, disc.bc, seed0).to_json());
    } else {
      realizations.push_back(sample_alloy(model.measure, model.bump, L, disc.dim, disc.points_per_unit, disc.bc, seed0)
                                 .to_json());
    }
  }
  t.summary = {{"E", E},
               {"N", bound.N},
               {"C", bound.C},
               {"nu_sup", model.measure.declared_density_sup()},
               {"measure", model.measure.to_json()},
               {"eps_max", wegner_eps_max(bound.N, bound.E0.value_or(E + eps.front()))},
               {"forced", cfg.force},
               {"exponent_fits", fits},
               {"note", "C is a configured constant; ratio = mean/bound is reported, not judged"}};
  out.extra_files.emplace_back("realizations.json", json{{"realizations", realizations}}.dump(2) + "\n");
  return out;
}

ScenarioOutput run_observability(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const double L = scalar_or_first(p, "L", "");
  const double G = number_or(p, "G", "", 1.0);
  const auto deltas = sweep(p, "delta", "");
  const auto Ts = sweep(p, "T", "");
  const double C1 = number_or(p, "C1", "", 1.0), C2 = number_or(p, "C2", "", 1.0), C3 = number_or(p, "C3", "", 1.0);
  for (std::size_t i = 0; i < deltas.size(); ++i) delta_checked(G, deltas[i], "/delta/" + std::to_string(i));
  for (double T : Ts)
    if (!(T > 0)) throw ConfigError("field /T: horizons must be positive");

  const Instance inst = make_instance(p, disc, L, cfg.seed);
  const double kappa = inst.spec.ground_energy();

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "observability";
  t.columns = {"T", "delta", "C_meas", "C_obs_branch1", "C_obs_branch2"};
  t.units = {"time", "length", "1", "1", "1"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double delta : deltas) {
    const auto mask = observation_mask(*inst.grid, observation_points(p, inst.grid->domain(), G, delta, cfg.seed));
    append_warnings(out.findings, mask.warnings, "delta=" + format_number(delta) + ": ");
    for (double T : Ts) {
      const auto meas = measure_observability(inst.spec, mask, T);
      const auto cobs = eval_cobs(ObservabilityParameters::from(inst.potential, kappa, T, G, delta, C1, C2, C3));
      t.add_row({T, delta, meas.c_meas, cobs.first.value_or(nan), cobs.second.value_or(nan)});
      if (meas.c_meas > cobs.value)
        out.findings.push_back("C_meas " + format_number(meas.c_meas) + " exceeds C_obs " + format_number(cobs.value) +
                               " at T=" + format_number(T) + ", delta=" + format_number(delta) +
                               ": the configured constants are falsified");
    }
  }
  t.summary = {{"kappa", kappa}, {"C1", C1}, {"C2", C2}, {"C3", C3}, {"L", L}, {"nodes", inst.grid->size()}};
  return out;
}

ScenarioOutput run_control(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  const auto disc = discretization(p);
  const double L = scalar_or_first(p, "L", "");
  const double G = number_or(p, "G", "", 1.0);
  const double delta = delta_checked(G, scalar_or_first(p, "delta", ""), "/delta");
  const double T = scalar_or_first(p, "T", "");
  if (!(T > 0)) throw ConfigError("field /T: must be positive");
  ControlOptions opts;
  opts.steps = integer_or(p, "steps", "", 64);
  if (p.contains("rho")) opts.rho = number(p, "rho", "");
  const auto target = string_or(p, "target", "", "all");
  if (target != "all" && target != "observable") throw ConfigError("field /target: expected \"all\" or \"observable\"");
  opts.observable_only = target == "observable";

  const Instance inst = make_instance(p, disc, L, cfg.seed);
  const auto mask = observation_mask(*inst.grid, observation_points(p, inst.grid->domain(), G, delta, cfg.seed));

  const auto initial = string_or(p, "initial", "", "random");
  Eigen::VectorXd phi0;
  if (initial == "ground_state") {
    phi0 = inst.spec.eigenvectors.col(0);
  } else if (initial == "constant") {
    phi0 = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(inst.grid->size()));
  } else if (initial == "random") {
    Rng rng(derive_seed(cfg.seed, kStreamInitial, 0));
    phi0.resize(static_cast<Eigen::Index>(inst.grid->size()));
    for (auto& x : phi0) x = rng.normal();
  } else {
    throw ConfigError("field /initial: expected \"random\", \"ground_state\" or \"constant\"");
  }
  phi0 /= inst.grid->norm(phi0);

  const auto meas = measure_observability(inst.spec, mask, T);
  const auto ctrl = hum_null_control(inst.spec, mask, T, phi0, opts);

  ScenarioOutput out;
  auto& t = out.table;
  t.kind = "control";
  t.columns = {"T", "delta", "rho", "steps", "cost", "C_meas", "terminal_norm", "terminal_norm_observable",
               "quadrature_error"};
  t.units = {"time", "length", "1", "count", "1", "1", "1", "1", "1"};
  t.add_row({T, delta, ctrl.rho, static_cast<std::int64_t>(opts.steps), ctrl.cost, meas.c_meas, ctrl.terminal_norm,
             ctrl.terminal_norm_observable, ctrl.quadrature_error});
  if (ctrl.cost > meas.c_meas)
    out.findings.push_back("control cost " + format_number(ctrl.cost) + " exceeds C_meas |phi0| = " +
                           format_number(meas.c_meas));
  append_warnings(out.findings, meas.warnings, "");

  std::ostringstream traj;
  traj << "t,node,value\n";
  for (std::size_t k = 0; k < ctrl.times.size(); ++k)
    for (Eigen::Index i = 0; i < ctrl.controls.cols(); ++i)
      if (mask.weights(i) > 0)
        traj << format_number(ctrl.times[k]) << ',' << i << ',' << format_number(ctrl.controls(static_cast<Eigen::Index>(k), i))
             << '\n';
  out.extra_files.emplace_back("trajectory.csv", traj.str());
  t.summary = {{"phi0_norm", 1.0}, {"initial", initial}, {"duality_cost", ctrl.duality_cost},
               {"covered_fraction", mask.covered_fraction}, {"kappa", inst.spec.ground_energy()}};
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentKind parse_kind(const std::string& name) {
  if (name == "ucp") return ExperimentKind::Ucp;
  if (name == "lifting") return ExperimentKind::Lifting;
  if (name == "wegner") return ExperimentKind::Wegner;
  if (name == "observability") return ExperimentKind::Observability;
  if (name == "control") return ExperimentKind::Control;
  if (name == "estimate-N") return ExperimentKind::EstimateN;
  throw ConfigError("unknown experiment kind \"" + name + "\"");
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Ucp: return "ucp";
    case ExperimentKind::Lifting: return "lifting";
    case ExperimentKind::Wegner: return "wegner";
    case ExperimentKind::Observability: return "observability";
    case ExperimentKind::Control: return "control";
    case ExperimentKind::EstimateN: return "estimate-N";
  }
  return "ucp";
}

ScenarioConfig load_config(const json& doc, std::optional<ExperimentKind> kind, const CliOverrides& overrides) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ScenarioConfig cfg;
  cfg.params = doc;
  if (doc.contains("kind")) {
    const auto& k = doc.at("kind");
    if (!k.is_string()) throw ConfigError("field /kind: expected a string");
    const auto from_file = parse_kind(k.get<std::string>());
    if (kind && *kind != from_file)
      throw ConfigError("field /kind: file declares \"" + k.get<std::string>() + "\" but \"" + kind_name(*kind) +
                        "\" was requested");
    cfg.kind = from_file;
  } else if (kind) {
    cfg.kind = *kind;
  } else {
    throw ConfigError("missing field /kind");
  }
  cfg.params["kind"] = kind_name(cfg.kind);

  if (overrides.seed) cfg.params["seed"] = *overrides.seed;
  if (!cfg.params.contains("seed")) throw ConfigError("missing field /seed");
  const auto& seed = cfg.params.at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    throw ConfigError("field /seed: expected a non-negative 64-bit integer");
  cfg.seed = seed.get<std::uint64_t>();

  if (overrides.output_dir) cfg.params["output_dir"] = overrides.output_dir->string();
  cfg.output_dir = string_or(cfg.params, "output_dir", "", "out");
  cfg.force = overrides.force || cfg.params.value("force", false);
  cfg.params["force"] = cfg.force;
  cfg.threads = default_thread_count();

  // Fields every run of this kind needs, checked before any work starts.
  static const std::vector<std::string> ucp_fields = {"L", "E", "delta"};
  static const std::vector<std::string> wegner_fields = {"L", "E", "epsilon", "model"};
  static const std::vector<std::string> obs_fields = {"L", "T", "delta"};
  static const std::vector<std::string> lifting_fields = {"L", "delta"};
  const std::vector<std::string>* required = &ucp_fields;
  switch (cfg.kind) {
    case ExperimentKind::Ucp:
    case ExperimentKind::EstimateN: required = &ucp_fields; break;
    case ExperimentKind::Wegner: required = &wegner_fields; break;
    case ExperimentKind::Observability:
    case ExperimentKind::Control: required = &obs_fields; break;
    case ExperimentKind::Lifting: required = &lifting_fields; break;
  }
  for (const auto& f : *required) require(cfg.params, f, "");
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path, std::optional<ExperimentKind> kind,
                                const CliOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return load_config(doc, kind, overrides);
}

json canonical_config(const ScenarioConfig& config) {
  json c = config.params;
  c.erase("output_dir");
  return c;
}

std::string config_hash(const ScenarioConfig& config) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical_config(config).dump());
  return s.str();
}

json RunManifest::to_json() const {
  return {{"config_hash", config_hash}, {"version", version},       {"started", started},
          {"finished", finished},       {"seed", seed},             {"seed_rule", seed_rule},
          {"files", files},             {"findings", findings}};
}

ScenarioOutput execute_scenario(const ScenarioConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Ucp: return run_ucp(config);
    case ExperimentKind::EstimateN: return run_estimate_n(config);
    case ExperimentKind::Lifting: return run_lifting(config);
    case ExperimentKind::Wegner: return run_wegner(config);
    case ExperimentKind::Observability: return run_observability(config);
    case ExperimentKind::Control: return run_control(config);
  }
  throw ConfigError("unknown experiment kind");
}

RunManifest run_scenario(const ScenarioConfig& config) {
  RunManifest manifest;
  manifest.started = utc_now();
  manifest.config_hash = config_hash(config);
  manifest.seed = config.seed;
  manifest.seed_rule = kSeedRule;

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec || !std::filesystem::is_directory(config.output_dir))
    throw ConfigError("output directory " + config.output_dir.string() + " is not writable");

  ScenarioOutput out = execute_scenario(config);
  out.table.summary["findings"] = out.findings;
  out.table.summary["config_hash"] = manifest.config_hash;
  emit_report(out.table, ReportFormat::Csv, config.output_dir);
  emit_report(out.table, ReportFormat::Json, config.output_dir);
  manifest.files = {"results.csv", "results.json"};
  for (const auto& [name, content] : out.extra_files) {
    write_atomic(config.output_dir / name, content);
    manifest.files.push_back(name);
  }
  manifest.files.push_back("manifest.json");
  manifest.findings = out.findings;
  manifest.finished = utc_now();
  write_atomic(config.output_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace ucplab
