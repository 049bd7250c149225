#include "ucplab/random_models.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/parallel.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ucplab {

namespace {

constexpr std::uint64_t kStreamRadii = 0xb7ea74e5;
constexpr std::uint64_t kStreamCouplings = 0xa1104;
constexpr std::uint64_t kStreamRealization = 0x3e6e7;

void check_support(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw ConfigError("single-site measure requires omega_minus <= omega_plus");
}

nlohmann::json sites_json(const std::vector<Site>& sites) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : sites) out.push_back({{"j", s.index}, {"omega", s.omega}});
  return out;
}

std::vector<Site> draw_sites(const SingleSiteMeasure& measure, double L, int dim, double reach,
                             std::uint64_t seed, std::uint64_t stream) {
  std::vector<Site> sites;
  for (auto& index : lattice_sites(L, dim, reach)) {
    Rng rng(site_seed(seed, stream, index));
    sites.push_back({std::move(index), measure.sample(rng)});
  }
  return sites;
}

double site_distance2(const Point& x, const std::vector<long>& j) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x(i) - static_cast<double>(j[static_cast<std::size_t>(i)]);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

SingleSiteMeasure SingleSiteMeasure::uniform(double lo, double hi) {
  check_support(lo, hi);
  return SingleSiteMeasure(Kind::Uniform, lo, hi);
}

SingleSiteMeasure SingleSiteMeasure::beta(double lo, double hi, double alpha, double beta) {
  check_support(lo, hi);
  if (!(alpha >= 1.0 && beta >= 1.0)) throw ConfigError("beta measure requires alpha, beta >= 1");
  SingleSiteMeasure m(Kind::Beta, lo, hi);
  m.alpha_ = alpha;
  m.beta_ = beta;
  return m;
}

SingleSiteMeasure SingleSiteMeasure::table(double lo, double hi, std::vector<double> weights) {
  check_support(lo, hi);
  if (weights.empty()) throw ConfigError("table measure needs at least one bin");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("table weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("table weights must not all vanish");
  SingleSiteMeasure m(Kind::Table, lo, hi);
  double acc = 0.0;
  for (double w : weights) {
    acc += w / total;
    m.cdf_.push_back(acc);
  }
  m.cdf_.back() = 1.0;
  return m;
}

double SingleSiteMeasure::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (degenerate()) return lo_;
  switch (kind_) {
    case Kind::Uniform:
      return lo_ + (hi_ - lo_) * u;
    case Kind::Beta:
      return lo_ + (hi_ - lo_) * boost::math::ibeta_inv(alpha_, beta_, u);
    case Kind::Table: {
      const auto bin = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      const std::size_t k = std::min(bin, cdf_.size() - 1);
      const double width = (hi_ - lo_) / static_cast<double>(cdf_.size());
      return lo_ + width * (static_cast<double>(k) + rng.uniform());
    }
  }
  return lo_;
}

double SingleSiteMeasure::mean() const {
  if (degenerate()) return lo_;
  switch (kind_) {
    case Kind::Uniform:
      return 0.5 * (lo_ + hi_);
    case Kind::Beta:
      return lo_ + (hi_ - lo_) * alpha_ / (alpha_ + beta_);
    case Kind::Table: {
      const double width = (hi_ - lo_) / static_cast<double>(cdf_.size());
      double m = 0.0, prev = 0.0;
      for (std::size_t k = 0; k < cdf_.size(); ++k) {
        m += (cdf_[k] - prev) * (lo_ + width * (static_cast<double>(k) + 0.5));
        prev = cdf_[k];
      }
      return m;
    }
  }
  return lo_;
}

double SingleSiteMeasure::density_sup() const {
  if (degenerate()) return std::numeric_limits<double>::infinity();
  const double width = hi_ - lo_;
  switch (kind_) {
    case Kind::Uniform:
      return 1.0 / width;
    case Kind::Beta: {
      const double mode = (alpha_ + beta_ > 2.0) ? (alpha_ - 1.0) / (alpha_ + beta_ - 2.0) : 0.5;
      const double peak = std::pow(mode, alpha_ - 1.0) * std::pow(1.0 - mode, beta_ - 1.0) /
                          boost::math::beta(alpha_, beta_);
      return peak / width;
    }
    case Kind::Table: {
      double best = 0.0, prev = 0.0;
      for (double c : cdf_) {
        best = std::max(best, c - prev);
        prev = c;
      }
      return best * static_cast<double>(cdf_.size()) / width;
    }
  }
  return 0.0;
}

void SingleSiteMeasure::declare_density_sup(double bound) {
  if (!(bound >= density_sup()))
    throw ConfigError("declared density bound is below the true sup of the density");
  declared_sup_ = bound;
}

nlohmann::json SingleSiteMeasure::to_json() const {
  static const char* names[] = {"uniform", "beta", "table"};
  nlohmann::json j = {{"kind", names[static_cast<int>(kind_)]},
                      {"omega_minus", lo_},
                      {"omega_plus", hi_}};
  if (kind_ == Kind::Beta) {
    j["alpha"] = alpha_;
    j["beta"] = beta_;
  }
  if (kind_ == Kind::Table) j["cdf"] = cdf_;
  if (declared_sup_) j["nu_sup"] = *declared_sup_;
  return j;
}

std::shared_ptr<const Grid> box_grid(double L, int dim, int points_per_unit, Boundary bc,
                                     std::size_t node_cap) {
  if (!(L > 0)) throw ConfigError("box side L must be positive");
  if (points_per_unit < 1) throw ConfigError("points_per_unit must be positive");
  const auto cells = static_cast<int>(std::lround(L * points_per_unit));
  const int n = bc == Boundary::Dirichlet ? cells - 1 : cells;
  return std::make_shared<const Grid>(
      build_grid(BoxDomain::centered_cube(L, dim), std::vector<int>(static_cast<std::size_t>(dim), n), bc, node_cap));
}

std::vector<std::vector<long>> lattice_sites(double L, int dim, double reach) {
  const double extent = L / 2 + reach;
  const auto kmax = static_cast<long>(std::ceil(extent));
  std::vector<long> axis;
  for (long k = -kmax; k <= kmax; ++k)
    if (std::abs(static_cast<double>(k)) < extent) axis.push_back(k);
  std::vector<std::vector<long>> sites;
  if (axis.empty()) return sites;
  std::vector<std::size_t> counter(static_cast<std::size_t>(dim), 0);
  while (true) {
    std::vector<long> s(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = axis[counter[i]];
    sites.push_back(std::move(s));
    std::size_t a = 0;
    for (; a < counter.size(); ++a) {
      if (++counter[a] < axis.size()) break;
      counter[a] = 0;
    }
    if (a == counter.size()) break;
  }
  return sites;
}

Potential breather_potential(const Grid& grid, const std::vector<Site>& sites) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    for (const auto& s : sites)
      if (site_distance2(x, s.index) < s.omega * s.omega) v(static_cast<Eigen::Index>(k)) += 1.0;
  }
  return Potential(std::move(v));
}

BreatherRealization sample_breather(const SingleSiteMeasure& measure, double L, int dim,
                                    int points_per_unit, Boundary bc, std::uint64_t seed) {
  if (!(measure.lo() >= 0.0 && measure.hi() < 0.25))
    throw ConfigError("breather radii require 0 <= omega_minus <= omega_plus < 1/4");
  BreatherRealization r;
  r.L = L;
  r.grid = box_grid(L, dim, points_per_unit, bc);
  r.sites = draw_sites(measure, L, dim, measure.hi(), seed, kStreamRadii);
  r.potential = breather_potential(*r.grid, r.sites);
  double h = 0.0;
  for (int i = 0; i < dim; ++i) h = std::max(h, r.grid->spacing(i));
  if (h > measure.lo() / 2) {
    std::ostringstream msg;
    msg << "grid spacing " << h << " does not resolve omega_minus " << measure.lo();
    r.warnings.push_back(msg.str());
  }
  return r;
}

nlohmann::json BreatherRealization::to_json() const {
  return {{"model", "breather"},
          {"L", L},
          {"points", grid->points()},
          {"sites", sites_json(sites)},
          {"warnings", warnings}};
}

double Bump::operator()(const Point& x) const {
  const double r = x.norm();
  switch (shape) {
    case Shape::Ball:
      return r < radius ? amplitude : 0.0;
    case Shape::Hat:
      return r < radius ? amplitude * (1.0 - r / radius) : 0.0;
  }
  return 0.0;
}

double Bump::lower_bound_on(double delta) const {
  if (delta >= radius) return 0.0;
  return shape == Shape::Ball ? amplitude : amplitude * (1.0 - delta / radius);
}

Potential alloy_potential(const Grid& grid, const std::vector<Site>& sites, const Bump& bump,
                          const Potential* background) {
  Eigen::VectorXd v = background ? background->values() : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  if (static_cast<std::size_t>(v.size()) != grid.size()) throw ConfigError("background potential size mismatch");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    for (const auto& s : sites) {
      Point y = x;
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) -= static_cast<double>(s.index[static_cast<std::size_t>(i)]);
      v(static_cast<Eigen::Index>(k)) += s.omega * bump(y);
    }
  }
  return Potential(std::move(v));
}

AlloyRealization sample_alloy(const SingleSiteMeasure& measure, const Bump& bump, double L, int dim,
                              int points_per_unit, Boundary bc, std::uint64_t seed,
                              const Potential* background) {
  if (!(bump.radius > 0)) throw ConfigError("bump radius must be positive");
  AlloyRealization r;
  r.L = L;
  r.bump = bump;
  r.grid = box_grid(L, dim, points_per_unit, bc);
  r.sites = draw_sites(measure, L, dim, bump.radius, seed, kStreamCouplings);
  r.potential = alloy_potential(*r.grid, r.sites, bump, background);
  return r;
}

nlohmann::json AlloyRealization::to_json() const {
  return {{"model", "alloy"},
          {"L", L},
          {"points", grid->points()},
          {"bump", {{"shape", bump.shape == Bump::Shape::Ball ? "ball" : "hat"},
                    {"radius", bump.radius},
                    {"amplitude", bump.amplitude}}},
          {"sites", sites_json(sites)},
          {"warnings", warnings}};
}

bool verify_bump_lower_bound(const Bump& bump, int dim, double c, double delta) {
  constexpr int kProbe = 41;
  Point x = Point::Zero(dim);
  std::vector<int> counter(static_cast<std::size_t>(dim), 0);
  while (true) {
    for (int i = 0; i < dim; ++i) x(i) = -delta + 2.0 * delta * counter[static_cast<std::size_t>(i)] / (kProbe - 1);
    if (x.norm() < delta && bump(x) < c) return false;
    int a = 0;
    for (; a < dim; ++a) {
      if (++counter[static_cast<std::size_t>(a)] < kProbe) break;
      counter[static_cast<std::size_t>(a)] = 0;
    }
    if (a == dim) break;
  }
  return true;
}

Potential RandomModel::realize(double L, std::uint64_t seed, std::shared_ptr<const Grid>* grid_out,
                               std::vector<std::string>* warnings) const {
  if (kind == Kind::Breather) {
    auto r = sample_breather(measure, L, dim, points_per_unit, bc, seed);
    if (grid_out) *grid_out = r.grid;
    if (warnings) *warnings = r.warnings;
    return r.potential;
  }
  auto grid = box_grid(L, dim, points_per_unit, bc);
  std::optional<Potential> background;
  if (background_amplitude != 0.0) {
    const double a = background_amplitude;
    background = Potential::sample(*grid, [a](const Point& x) {
      double v = a;
      for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::pow(std::cos(std::numbers::pi * x(i)), 2);
      return v;
    });
  }
  auto r = sample_alloy(measure, bump, L, dim, points_per_unit, bc, seed, background ? &*background : nullptr);
  if (grid_out) *grid_out = r.grid;
  if (warnings) *warnings = r.warnings;
  return r.potential;
}

void RunningStats::push(double x) {
  ++count;
  const double d = x - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double n1 = static_cast<double>(count), n2 = static_cast<double>(other.count);
  const double d = other.mean - mean;
  const double n = n1 + n2;
  mean += d * n2 / n;
  m2 += other.m2 + d * d * n1 * n2 / n;
  count += other.count;
}

double wegner_eps_max(double N, double E0) {
  return 0.25 * std::pow(8.0, -N * (2.0 + std::sqrt(std::abs(E0 + 1.0))));
}

double wegner_bound(double E0, double eps, double L, double N, double C, double nu_sup, int dim) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("wegner_bound: eps must lie in (0, 1)");
  if (!(N > 0.0 && C > 0.0 && nu_sup > 0.0)) throw ConfigError("wegner_bound: N, C, nu_sup must be positive");
  const double exponent = 1.0 / (N * (2.0 + std::sqrt(std::abs(E0 + 1.0))));
  return C * nu_sup * std::pow(eps, exponent) * std::pow(std::abs(std::log(eps)), dim) * std::pow(L, dim);
}

std::vector<WegnerEstimate> wegner_sweep(const RandomModel& model, double L, double energy,
                                         const std::vector<double>& eps, std::size_t samples,
                                         std::uint64_t seed, const WegnerBoundParams& bound,
                                         bool force, unsigned threads) {
  if (samples < 2) throw ConfigError("wegner_mc: need at least 2 samples");
  if (eps.empty()) throw ConfigError("wegner_mc: epsilon list is empty");
  for (double e : eps) {
    if (!(e > 0.0)) throw ConfigError("wegner_mc: epsilon must be positive");
    const double e0 = bound.E0.value_or(energy + e);
    const double emax = wegner_eps_max(bound.N, e0);
    if (e > emax && !force) {
      std::ostringstream msg;
      msg << "epsilon " << e << " exceeds eps_max " << emax << " for N=" << bound.N << " (use --force)";
      throw ConfigError(msg.str());
    }
  }

  std::vector<std::vector<std::size_t>> counts(eps.size(), std::vector<std::size_t>(samples, 0));
  std::size_t grid_size = 0;
  parallel_for(samples, threads, [&](std::size_t i) {
    std::shared_ptr<const Grid> grid;
    const Potential v = model.realize(L, derive_seed(seed, kStreamRealization, i), &grid);
    const Eigen::VectorXd ev = eigenvalues_only(assemble_hamiltonian(grid, v));
    for (std::size_t k = 0; k < eps.size(); ++k) counts[k][i] = count_eigenvalues(ev, energy - eps[k], energy + eps[k]);
    if (i == 0) grid_size = grid->size();
  });

  std::vector<WegnerEstimate> out;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    RunningStats stats;
    for (std::size_t c : counts[k]) stats.push(static_cast<double>(c));
    WegnerEstimate w;
    w.energy = energy;
    w.eps = eps[k];
    w.L = L;
    w.samples = samples;
    w.mean = stats.mean;
    w.stderr_mean = stats.stderr_of_mean();
    w.N = bound.N;
    w.C = bound.C;
    w.E0 = bound.E0.value_or(energy + eps[k]);
    w.eps_max = wegner_eps_max(bound.N, w.E0);
    w.bound = eps[k] < 1.0 ? wegner_bound(w.E0, eps[k], L, bound.N, bound.C,
                                          model.measure.declared_density_sup(), model.dim)
                           : std::numeric_limits<double>::quiet_NaN();
    w.grid_size = grid_size;
    w.counts = std::move(counts[k]);
    out.push_back(std::move(w));
  }
  return out;
}

WegnerEstimate wegner_mc(const RandomModel& model, double L, double energy, double eps,
                         std::size_t samples, std::uint64_t seed, const WegnerBoundParams& bound,
                         bool force, unsigned threads) {
  return wegner_sweep(model, L, energy, {eps}, samples, seed, bound, force, threads).front();
}

ExponentFit fit_wegner_exponent(const std::vector<std::pair<double, double>>& eps_mean, int dim) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (const auto& [e, m] : eps_mean) {
    if (!(e > 0.0 && e < 1.0)) {
      fit.diagnostics.push_back("dropped eps=" + std::to_string(e) + ": outside (0, 1)");
      continue;
    }
    if (!(m > 0.0)) {
      fit.diagnostics.push_back("dropped eps=" + std::to_string(e) + ": zero mean trace");
      continue;
    }
    xs.push_back(std::log(e));
    ys.push_back(std::log(m) - dim * std::log(std::abs(std::log(e))));
  }
  if (xs.size() < 4) throw ConfigError("fit_wegner_exponent: need at least 4 points with positive mean");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*hi - *lo < 2.0 * std::numbers::ln10 - 1e-12)
    throw ConfigError("fit_wegner_exponent: eps must span at least two decades");

  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.used = xs.size();
  return fit;
}

}  // namespace ucplab
