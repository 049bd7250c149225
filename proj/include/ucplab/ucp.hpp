#pragma once

#include "ucplab/geometry.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/spectral.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ucplab {

inline constexpr double kDefaultUcpN = 10.0;

struct UcpParameters {
  double N = kDefaultUcpN;
  double G = 1.0;
  double delta = 0.25;
  double energy = 0.0;
};

// Exponent of the unique continuation constant at shift lambda:
//   g(lambda) = 1 + G^{4/3} |V - lambda|_inf^{2/3} + G sqrt((E - lambda)_+)
// where |V - lambda|_inf is evaluated from the potential's range [v_min, v_max].
double ucp_exponent(double lambda, double v_min, double v_max, double energy, double G);

struct CucValue {
  double value = 1.0;   // (delta/G)^{N g(lambda*)}
  double lambda = 0.0;  // minimiser of g
  double exponent = 1.0;  // g(lambda*)
};

// sup over lambda of (delta/G)^{N g(lambda)}. Since delta/G < 1 this is the
// minimum of g, found by a 1000-point scan of [v_min - |E|, max(v_max, E)]
// refined by golden section; the kinks v_min, v_max, (v_min+v_max)/2 and E are
// also tried directly.
CucValue eval_cuc(double v_min, double v_max, double energy, double G, double delta, double N);
CucValue eval_cuc(const Potential& v, double energy, double G, double delta, double N);

struct SubspaceRatio {
  double ratio = 1.0;
  Eigen::VectorXd minimizer;  // nodal values, unit weighted norm
  std::size_t dimension = 0;
};

// Exact minimum of |psi|^2_{S} / |psi|^2 over psi in span{v_k : lambda_k <= E}:
// the smallest eigenvalue of the compressed mask Q^T M Q.
SubspaceRatio min_subspace_ratio(const SpectralData& spec, double energy, const ObservationMask& mask);

// Observed mass fraction of a single vector.
double observed_fraction(const ObservationMask& mask, const Eigen::VectorXd& psi);

struct UcpResult {
  double cuc = 1.0;
  double lambda_star = 0.0;
  double exponent = 1.0;
  double ratio = 1.0;
  bool satisfied = true;
  std::size_t dimension = 0;
  UcpParameters params;
};

UcpResult verify_ucp_instance(const SpectralData& spec, const Potential& v, const ObservationMask& mask,
                              const UcpParameters& params);

struct UcpInstance {
  const SpectralData* spec = nullptr;
  const Potential* potential = nullptr;
  const ObservationMask* mask = nullptr;
  double energy = 0.0;
  double G = 1.0;
  double delta = 0.25;
};

struct NEstimate {
  double n_hat = 0.0;
  std::vector<std::optional<double>> per_instance;  // nullopt when excluded
  std::vector<double> ratios;
  std::vector<double> exponents;
  std::vector<std::string> diagnostics;
};

// Smallest N for which the bound holds on every instance:
//   N_inst = ln(ratio) / (g(lambda*) ln(delta/G)),  N_hat = max N_inst.
NEstimate estimate_n_empirical(const std::vector<UcpInstance>& instances);

// Inversion on precomputed (ratio, exponent, delta/G) triples.
std::optional<double> invert_for_n(double ratio, double exponent, double delta_over_g);

}  // namespace ucplab
