#pragma once

#include "ucplab/grid.hpp"
#include "ucplab/rng.hpp"
#include "ucplab/spectral.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ucplab {

// Single-site distribution mu with support in [omega_minus, omega_plus] and a
// bounded density. omega_minus == omega_plus is accepted as the degenerate
// (deterministic) measure; its density bound is +inf.
class SingleSiteMeasure {
 public:
  enum class Kind { Uniform, Beta, Table };

  static SingleSiteMeasure uniform(double lo, double hi);
  // Beta(alpha, beta) rescaled to [lo, hi]; alpha, beta >= 1 keeps the density bounded.
  static SingleSiteMeasure beta(double lo, double hi, double alpha, double beta);
  // Piecewise-constant density with the given relative bin weights on [lo, hi].
  static SingleSiteMeasure table(double lo, double hi, std::vector<double> weights);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool degenerate() const { return hi_ == lo_; }

  double sample(Rng& rng) const;
  double mean() const;
  // sup of the implemented density.
  double density_sup() const;
  // Density bound used in the Wegner bound; >= density_sup().
  double declared_density_sup() const { return declared_sup_.value_or(density_sup()); }
  void declare_density_sup(double bound);

  nlohmann::json to_json() const;

 private:
  SingleSiteMeasure(Kind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

  Kind kind_;
  double lo_;
  double hi_;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  std::vector<double> cdf_;  // table: cumulative bin probabilities
  std::optional<double> declared_sup_;
};

// Grid on Lambda_L = (-L/2, L/2)^d with spacing 1/points_per_unit.
std::shared_ptr<const Grid> box_grid(double L, int dim, int points_per_unit, Boundary bc,
                                     std::size_t node_cap = kDefaultNodeCap);

struct Site {
  std::vector<long> index;
  double omega = 0.0;
};

// Integer sites whose ball of radius `reach` can meet Lambda_L.
std::vector<std::vector<long>> lattice_sites(double L, int dim, double reach);

struct BreatherRealization {
  double L = 0.0;
  std::shared_ptr<const Grid> grid;
  std::vector<Site> sites;
  Potential potential;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

// V(x) = #{ j : |x - j| < omega_j } at every node.
Potential breather_potential(const Grid& grid, const std::vector<Site>& sites);

// Radii are drawn per site from a seed keyed by the site's coordinates, so a
// smaller box sees the same radii as the corresponding part of a larger one.
BreatherRealization sample_breather(const SingleSiteMeasure& measure, double L, int dim,
                                    int points_per_unit, Boundary bc, std::uint64_t seed);

struct Bump {
  enum class Shape { Ball, Hat };
  Shape shape = Shape::Ball;
  double radius = 0.25;
  double amplitude = 1.0;

  double operator()(const Point& x) const;
  // Guaranteed lower bound c of u on B_delta (0 when delta >= radius).
  double lower_bound_on(double delta) const;
};

struct AlloyRealization {
  double L = 0.0;
  std::shared_ptr<const Grid> grid;
  std::vector<Site> sites;  // omega is the coupling
  Bump bump;
  Potential potential;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

// V_per + sum_j omega_j u(x - j).
Potential alloy_potential(const Grid& grid, const std::vector<Site>& sites, const Bump& bump,
                          const Potential* background);

AlloyRealization sample_alloy(const SingleSiteMeasure& measure, const Bump& bump, double L, int dim,
                              int points_per_unit, Boundary bc, std::uint64_t seed,
                              const Potential* background = nullptr);

// Checks u >= c on B_delta at every node of a fine probe grid; returns false on failure.
bool verify_bump_lower_bound(const Bump& bump, int dim, double c, double delta);

struct RandomModel {
  enum class Kind { Breather, Alloy };
  Kind kind = Kind::Breather;
  SingleSiteMeasure measure = SingleSiteMeasure::uniform(0.05, 0.2);
  Bump bump;
  double background_amplitude = 0.0;  // alloy: V_per(x) = A prod_i cos^2(pi x_i)
  int dim = 1;
  int points_per_unit = 40;
  Boundary bc = Boundary::Dirichlet;

  Potential realize(double L, std::uint64_t seed, std::shared_ptr<const Grid>* grid_out = nullptr,
                    std::vector<std::string>* warnings = nullptr) const;
};

// Order-independent mean/variance accumulator (Chan et al. pairwise merge).
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  void merge(const RunningStats& other);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_of_mean() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct WegnerBoundParams {
  double N = 10.0;
  double C = 1.0;
  std::optional<double> E0;  // defaults to E + eps
};

// (1/4) 8^{-N (2 + |E0 + 1|^{1/2})}
double wegner_eps_max(double N, double E0);

// C |nu|_inf eps^{1/(N (2 + |E0+1|^{1/2}))} |ln eps|^d L^d
double wegner_bound(double E0, double eps, double L, double N, double C, double nu_sup, int dim);

struct WegnerEstimate {
  double energy = 0.0;
  double eps = 0.0;
  double L = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double bound = 0.0;
  double eps_max = 0.0;
  double N = 0.0;
  double C = 0.0;
  double E0 = 0.0;
  std::size_t grid_size = 0;
  std::vector<std::size_t> counts;  // per realization, by index
};

// Monte Carlo estimate of E[Tr 1_{[E-eps, E+eps]}(H_{omega,L})] for several
// eps at once, reusing each realization's spectrum. Realization i is seeded by
// derive_seed(seed, stream, i); the reduction runs in index order.
std::vector<WegnerEstimate> wegner_sweep(const RandomModel& model, double L, double energy,
                                         const std::vector<double>& eps, std::size_t samples,
                                         std::uint64_t seed, const WegnerBoundParams& bound,
                                         bool force, unsigned threads = 1);

WegnerEstimate wegner_mc(const RandomModel& model, double L, double energy, double eps,
                         std::size_t samples, std::uint64_t seed, const WegnerBoundParams& bound,
                         bool force, unsigned threads = 1);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual in log space
  std::size_t used = 0;
  std::vector<std::string> diagnostics;
};

// Least-squares slope of ln(mean / |ln eps|^d) against ln eps.
ExponentFit fit_wegner_exponent(const std::vector<std::pair<double, double>>& eps_mean, int dim);

}  // namespace ucplab
