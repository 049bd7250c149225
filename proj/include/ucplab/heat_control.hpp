#pragma once

#include "ucplab/geometry.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/spectral.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ucplab {

struct ObservabilityParameters {
  double T = 1.0;
  double G = 1.0;
  double delta = 0.25;
  double v_sup = 0.0;              // |V|_inf
  double v_minus_kappa_sup = 0.0;  // |V - kappa|_inf
  double kappa = 0.0;              // inf sigma(H)
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;

  static ObservabilityParameters from(const Potential& v, double kappa, double T, double G, double delta,
                                      double C1 = 1.0, double C2 = 1.0, double C3 = 1.0);
};

enum class CobsBranch { Auto, First, Second };

struct CobsValue {
  double value = 0.0;
  CobsBranch used = CobsBranch::First;
  std::optional<double> first;
  std::optional<double> second;
  double t_star = 0.0;          // minimiser of the second branch
  bool hypothesis_met = true;   // false when the first branch is evaluated at kappa < 0
};

// First branch:  (delta/G)^{-C2(1 + G^{4/3}|V|^{2/3})} (C1/T) exp(C3 G^2 ln^2(delta/G) / T)
// Second branch: (delta/G)^{-C2(1 + G^{4/3}|V-kappa|^{2/3})}
//                  inf_{t in [0,T)} C1/(T-t) exp(C3 G^2 ln^2(delta/G)/(T-t) - 2 kappa t)
// Auto evaluates every branch whose hypothesis holds and returns the smaller;
// for kappa < 0 it falls back to the first branch and clears hypothesis_met.
CobsValue eval_cobs(const ObservabilityParameters& p, CobsBranch branch = CobsBranch::Auto);

// (1 - e^{-sT}) / s, equal to T at s = 0.
double exp_integral(double s, double T);

// B = int_0^T e^{-Ht} M e^{-Ht} dt, stored in the eigenbasis of H.
struct Gramian {
  Eigen::MatrixXd eigen;  // B~_kl = (U^T M U)_kl I(lambda_k + lambda_l, T)
  double T = 0.0;

  // Operator on nodal values, self-adjoint in the weighted product.
  Eigen::MatrixXd grid_matrix(const SpectralData& spec) const;
};

Gramian build_gramian(const SpectralData& spec, const ObservationMask& mask, double T);

// Mask compressed to the eigenbasis: U^T diag(m) U with U = sqrt(h) V.
Eigen::MatrixXd compressed_mask(const SpectralData& spec, const ObservationMask& mask);

struct ObservabilityMeasurement {
  double c_meas = 0.0;          // +inf when an observable mode is invisible
  Eigen::VectorXd worst;        // nodal, unit weighted norm
  bool singular = false;
  std::size_t unobservable_in_practice = 0;  // modes with e^{-lambda T} < 1e-300
  std::vector<std::string> warnings;
};

// Smallest C with |e^{-HT} phi|^2 <= C^2 int_0^T |e^{-Ht} phi|_S^2 dt: the
// square root of the top generalized eigenvalue of (e^{-2HT}, B).
ObservabilityMeasurement measure_observability(const SpectralData& spec, const ObservationMask& mask, double T);

struct ControlOptions {
  std::optional<double> rho;  // default 1e-12 tr(Lambda_T) / N
  int steps = 64;
  // Steer only modes with e^{-lambda T} >= 1e-300 to zero; the rest are left free.
  bool observable_only = false;
};

struct ControlResult {
  std::vector<double> times;       // interval start times
  Eigen::MatrixXd controls;        // steps x nodes, piecewise constant, zero off the mask
  double cost = 0.0;               // |u|_{L2((0,T) x S)}
  Eigen::VectorXd terminal;        // nodal terminal state
  double terminal_norm = 0.0;
  double terminal_norm_observable = 0.0;  // restricted to modes with e^{-lambda T} >= 1e-300
  double rho = 0.0;
  double quadrature_error = 0.0;   // |Lambda_steps - Lambda_T|_F / |Lambda_T|_F
  double duality_cost = 0.0;       // sqrt(<b, (Lambda_steps + rho)^{-1} b>), b = e^{-HT} phi0
};

// Penalised duality construction on piecewise-constant controls:
//   (Lambda + rho) eta = e^{-HT} phi0,  u_k = -(1/dt) M int_{I_k} e^{-H(T-s)} ds eta,
// where Lambda = sum_k (1/dt) E_k M E_k is the Gramian of the discrete control
// space and E_k = int_{I_k} e^{-H(T-s)} ds is integrated exactly per interval.
// The terminal state is then rho * eta.
ControlResult hum_null_control(const SpectralData& spec, const ObservationMask& mask, double T,
                               const Eigen::VectorXd& phi0, const ControlOptions& options = {});

inline constexpr double kUnobservableThreshold = 1e-300;

}  // namespace ucplab
