#include "ucplab/ucp.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ucplab {

double ucp_exponent(double lambda, double v_min, double v_max, double energy, double G) {
  const double sup = std::max(std::abs(v_max - lambda), std::abs(v_min - lambda));
  const double below = std::max(0.0, energy - lambda);
  return 1.0 + std::pow(G, 4.0 / 3.0) * std::cbrt(sup * sup) + G * std::sqrt(below);
}

CucValue eval_cuc(double v_min, double v_max, double energy, double G, double delta, double N) {
  if (!(G > 0)) throw ConfigError("eval_cuc: G must be positive");
  if (!(delta > 0 && delta < G / 2)) throw ConfigError("eval_cuc: delta not in (0, G/2)");
  if (!(N > 0)) throw ConfigError("eval_cuc: N must be positive");
  auto g = [&](double lambda) { return ucp_exponent(lambda, v_min, v_max, energy, G); };

  const double lo = v_min - std::abs(energy);
  const double hi = std::max(v_max, energy);
  ScalarMinimum best = scan_and_refine(g, lo, hi, 1000);
  for (double kink : {v_min, v_max, 0.5 * (v_min + v_max), energy}) {
    if (kink < lo || kink > hi) continue;
    const double gk = g(kink);
    if (gk < best.value) best = {kink, gk};
  }
  return {std::pow(delta / G, N * best.value), best.x, best.value};
}

CucValue eval_cuc(const Potential& v, double energy, double G, double delta, double N) {
  return eval_cuc(v.min(), v.max(), energy, G, delta, N);
}

SubspaceRatio min_subspace_ratio(const SpectralData& spec, double energy, const ObservationMask& mask) {
  if (mask.size() != spec.size()) throw ConfigError("min_subspace_ratio: mask size mismatch");
  const auto dim = static_cast<Eigen::Index>(subspace_dimension(spec, energy));
  if (dim == 0) throw ConfigError("empty spectral subspace: no eigenvalue <= " + std::to_string(energy));
  // Euclidean-orthonormal columns, so the compressed form needs no weights.
  const Eigen::MatrixXd q = spec.eigenvectors.leftCols(dim) * std::sqrt(spec.cell_volume);
  const Eigen::MatrixXd compressed = q.transpose() * mask.weights.asDiagonal() * q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(compressed);
  if (solver.info() != Eigen::Success) throw NumericalError("min_subspace_ratio: eigensolver failed");

  SubspaceRatio out;
  out.dimension = static_cast<std::size_t>(dim);
  out.ratio = std::clamp(solver.eigenvalues()(0), 0.0, 1.0);
  out.minimizer = spec.eigenvectors.leftCols(dim) * solver.eigenvectors().col(0);
  return out;
}

double observed_fraction(const ObservationMask& mask, const Eigen::VectorXd& psi) {
  const double total = psi.squaredNorm();
  if (total == 0.0) throw ConfigError("observed_fraction: zero vector");
  return mask.weights.dot(psi.cwiseAbs2()) / total;
}

UcpResult verify_ucp_instance(const SpectralData& spec, const Potential& v, const ObservationMask& mask,
                              const UcpParameters& params) {
  const CucValue cuc = eval_cuc(v, params.energy, params.G, params.delta, params.N);
  const SubspaceRatio measured = min_subspace_ratio(spec, params.energy, mask);
  UcpResult r;
  r.cuc = cuc.value;
  r.lambda_star = cuc.lambda;
  r.exponent = cuc.exponent;
  r.ratio = measured.ratio;
  r.dimension = measured.dimension;
  r.satisfied = measured.ratio >= cuc.value;
  r.params = params;
  return r;
}

std::optional<double> invert_for_n(double ratio, double exponent, double delta_over_g) {
  if (!(ratio > 0.0) || !(delta_over_g > 0.0 && delta_over_g < 1.0) || !(exponent > 0.0)) return std::nullopt;
  return std::log(std::min(ratio, 1.0)) / (exponent * std::log(delta_over_g));
}

NEstimate estimate_n_empirical(const std::vector<UcpInstance>& instances) {
  NEstimate est;
  bool any = false;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    // N only scales the exponent, so lambda* does not depend on it.
    const CucValue cuc = eval_cuc(*inst.potential, inst.energy, inst.G, inst.delta, 1.0);
    const SubspaceRatio measured = min_subspace_ratio(*inst.spec, inst.energy, *inst.mask);
    est.ratios.push_back(measured.ratio);
    est.exponents.push_back(cuc.exponent);
    const auto n = invert_for_n(measured.ratio, cuc.exponent, inst.delta / inst.G);
    if (!n) {
      std::ostringstream msg;
      msg << "instance " << i << " excluded: ratio " << measured.ratio << " (mask misses the subspace)";
      est.diagnostics.push_back(msg.str());
    } else {
      est.n_hat = any ? std::max(est.n_hat, *n) : *n;
      any = true;
    }
    est.per_instance.push_back(n);
  }
  return est;
}

}  // namespace ucplab
