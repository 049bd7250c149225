#include "ucplab/heat_control.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ucplab {

namespace {

double range_sup(const Potential& v, double shift) {
  return std::max(std::abs(v.max() - shift), std::abs(v.min() - shift));
}

// log of (delta/G)^{-C2 (1 + G^{4/3} s^{2/3})}
double log_prefactor(const ObservabilityParameters& p, double sup) {
  const double ratio_log = std::log(p.delta / p.G);
  return -p.C2 * (1.0 + std::pow(p.G, 4.0 / 3.0) * std::cbrt(sup * sup)) * ratio_log;
}

double heat_constant(const ObservabilityParameters& p) {
  const double l = std::log(p.delta / p.G);
  return p.C3 * p.G * p.G * l * l;
}

}  // namespace

ObservabilityParameters ObservabilityParameters::from(const Potential& v, double kappa, double T, double G,
                                                      double delta, double C1, double C2, double C3) {
  ObservabilityParameters p;
  p.T = T;
  p.G = G;
  p.delta = delta;
  p.v_sup = v.sup_norm();
  p.v_minus_kappa_sup = range_sup(v, kappa);
  p.kappa = kappa;
  p.C1 = C1;
  p.C2 = C2;
  p.C3 = C3;
  return p;
}

CobsValue eval_cobs(const ObservabilityParameters& p, CobsBranch branch) {
  if (!(p.T > 0)) throw ConfigError("eval_cobs: T must be positive");
  if (!(p.G > 0) || !(p.delta > 0 && p.delta < p.G / 2)) throw ConfigError("eval_cobs: delta/G must lie in (0, 1/2)");
  if (!(p.C1 > 0 && p.C2 > 0 && p.C3 > 0)) throw ConfigError("eval_cobs: C1, C2, C3 must be positive");
  if (branch == CobsBranch::Second && !(p.kappa > 0))
    throw ConfigError("eval_cobs: second branch requires kappa > 0");

  const double a = heat_constant(p);
  CobsValue out;
  const bool want_first = branch != CobsBranch::Second;
  const bool want_second = branch == CobsBranch::Second || (branch == CobsBranch::Auto && p.kappa > 0);

  if (want_first) {
    out.first = std::exp(log_prefactor(p, p.v_sup) + std::log(p.C1 / p.T) + a / p.T);
    out.hypothesis_met = p.kappa >= 0;
  }
  if (want_second) {
    // Minimise over x = ln(T - t) so that tiny T - t stays resolvable.
    auto f = [&](double x) {
      const double tau = std::exp(x);
      return std::log(p.C1) - x + a / tau - 2.0 * p.kappa * (p.T - tau);
    };
    const double hi = std::log(p.T);
    const ScalarMinimum m = scan_and_refine(f, hi - 40.0, hi, 1000);
    out.second = std::exp(log_prefactor(p, p.v_minus_kappa_sup) + m.value);
    out.t_star = std::max(0.0, p.T - std::exp(m.x));
  }

  if (out.first && out.second) {
    out.used = *out.first <= *out.second ? CobsBranch::First : CobsBranch::Second;
    out.value = std::min(*out.first, *out.second);
  } else if (out.first) {
    out.used = CobsBranch::First;
    out.value = *out.first;
  } else {
    out.used = CobsBranch::Second;
    out.value = *out.second;
  }
  return out;
}

double exp_integral(double s, double T) {
  if (s == 0.0) return T;
  return -std::expm1(-s * T) / s;
}

Eigen::MatrixXd compressed_mask(const SpectralData& spec, const ObservationMask& mask) {
  if (mask.size() != spec.size()) throw ConfigError("mask size does not match the operator");
  const Eigen::MatrixXd u = spec.unit_basis();
  return u.transpose() * mask.weights.asDiagonal() * u;
}

Eigen::MatrixXd Gramian::grid_matrix(const SpectralData& spec) const {
  const Eigen::MatrixXd u = spec.unit_basis();
  return u * eigen * u.transpose();
}

Gramian build_gramian(const SpectralData& spec, const ObservationMask& mask, double T) {
  if (!(T > 0)) throw ConfigError("build_gramian: T must be positive");
  Gramian g;
  g.T = T;
  g.eigen = compressed_mask(spec, mask);
  const auto& ev = spec.eigenvalues;
  for (Eigen::Index l = 0; l < g.eigen.cols(); ++l)
    for (Eigen::Index k = 0; k < g.eigen.rows(); ++k) g.eigen(k, l) *= exp_integral(ev(k) + ev(l), T);
  return g;
}

ObservabilityMeasurement measure_observability(const SpectralData& spec, const ObservationMask& mask, double T) {
  const Gramian g = build_gramian(spec, mask, T);
  const auto n = g.eigen.rows();
  ObservabilityMeasurement out;

  // Modes with e^{-lambda T} below the threshold contribute nothing to the
  // left-hand side in double precision; the constant is taken over the rest.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::exp(-spec.eigenvalues(k) * T) < kUnobservableThreshold) ++out.unobservable_in_practice;
    else kept.push_back(k);
  }
  if (out.unobservable_in_practice > 0) {
    std::ostringstream msg;
    msg << out.unobservable_in_practice << " modes have e^{-lambda T} < 1e-300 (unobservable in practice)";
    out.warnings.push_back(msg.str());
  }
  const auto r = static_cast<Eigen::Index>(kept.size());
  if (r == 0) {
    out.c_meas = 0.0;
    out.worst = spec.eigenvectors.col(0) / std::sqrt(spec.cell_volume * spec.eigenvectors.col(0).squaredNorm());
    return out;
  }

  // Jacobi scaling: b = S B S with unit diagonal where B is nonzero.
  Eigen::MatrixXd b(r, r);
  Eigen::VectorXd decay2(r), scale(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double d = g.eigen(kept[i], kept[i]);
    scale(i) = d > 0 ? 1.0 / std::sqrt(d) : 1.0;
    decay2(i) = std::exp(-2.0 * spec.eigenvalues(kept[i]) * T);
  }
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < r; ++i) b(i, j) = scale(i) * g.eigen(kept[i], kept[j]) * scale(j);
  const Eigen::VectorXd a = decay2.cwiseProduct(scale.cwiseProduct(scale));

  auto to_nodal = [&](const Eigen::VectorXd& c_scaled) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < r; ++i) c(kept[i]) = scale(i) * c_scaled(i);
    Eigen::VectorXd f = spec.synthesize(c);
    return Eigen::VectorXd(f / (std::sqrt(spec.cell_volume) * f.norm()));
  };

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(b);
  if (gram.info() != Eigen::Success) throw NumericalError("measure_observability: Gramian eigensolver failed");
  const Eigen::VectorXd sigma = gram.eigenvalues();
  const double sigma_max = std::max(sigma.cwiseAbs().maxCoeff(), 0.0);
  const double cutoff = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(r) * sigma_max;
  Eigen::Index null_dim = 0;
  while (null_dim < r && sigma(null_dim) <= cutoff) ++null_dim;

  const Eigen::MatrixXd& q = gram.eigenvectors();
  if (null_dim > 0) {
    const Eigen::MatrixXd qn = q.leftCols(null_dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hidden(qn.transpose() * a.asDiagonal() * qn);
    const double top = hidden.eigenvalues()(null_dim - 1);
    if (top > 1e-20 * a.maxCoeff() || sigma_max == 0.0) {
      out.singular = true;
      out.c_meas = std::numeric_limits<double>::infinity();
      out.worst = to_nodal(qn * hidden.eigenvectors().col(null_dim - 1));
      out.warnings.push_back("observability Gramian is singular on a mode that survives to time T");
      return out;
    }
  }

  const Eigen::Index m = r - null_dim;
  const Eigen::VectorXd inv_sqrt = sigma.tail(m).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd whitened = q.rightCols(m) * inv_sqrt.asDiagonal();
  const Eigen::MatrixXd k = whitened.transpose() * a.asDiagonal() * whitened;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> top(k);
  if (top.info() != Eigen::Success) throw NumericalError("measure_observability: eigensolver failed");
  out.c_meas = std::sqrt(std::max(top.eigenvalues()(m - 1), 0.0));
  out.worst = to_nodal(whitened * top.eigenvectors().col(m - 1));
  return out;
}

ControlResult hum_null_control(const SpectralData& spec, const ObservationMask& mask, double T,
                               const Eigen::VectorXd& phi0, const ControlOptions& options) {
  if (!(T > 0)) throw ConfigError("hum_null_control: T must be positive");
  if (options.steps < 1) throw ConfigError("hum_null_control: steps must be positive");
  if (static_cast<std::size_t>(phi0.size()) != spec.size()) throw ConfigError("hum_null_control: phi0 size mismatch");
  const auto n = static_cast<Eigen::Index>(spec.size());
  const int steps = options.steps;
  const double dt = T / steps;
  const Eigen::VectorXd& ev = spec.eigenvalues;
  const Eigen::MatrixXd m = compressed_mask(spec, mask);

  // e_k(lambda) = int_{s_k}^{s_k + dt} e^{-lambda (T - s)} ds
  Eigen::MatrixXd e(n, steps);
  for (int k = 0; k < steps; ++k) {
    const double remaining = T - (k + 1) * dt;
    for (Eigen::Index i = 0; i < n; ++i) e(i, k) = std::exp(-ev(i) * remaining) * exp_integral(ev(i), dt);
  }
  Eigen::MatrixXd lambda_steps = (e * e.transpose() / dt).cwiseProduct(m);
  const Gramian continuous = build_gramian(spec, mask, T);

  ControlResult out;
  const double trace = continuous.eigen.trace();
  out.rho = options.rho.value_or(1e-12 * trace / static_cast<double>(n));
  if (!(out.rho >= 0)) throw ConfigError("hum_null_control: rho must be >= 0");
  out.quadrature_error = (lambda_steps - continuous.eigen).norm() / std::max(continuous.eigen.norm(), 1e-300);
  if (options.observable_only) {
    // Decouple the free modes: their rows of Lambda are replaced by the identity
    // and their right-hand side is zero, so eta vanishes on them.
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::exp(-ev(i) * T) < kUnobservableThreshold) {
        lambda_steps.row(i).setZero();
        lambda_steps.col(i).setZero();
        lambda_steps(i, i) = 1.0;
      }
  }

  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = std::exp(-ev(i) * T);
  b = b.cwiseProduct(spec.coefficients(phi0));
  if (options.observable_only)
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::exp(-ev(i) * T) < kUnobservableThreshold) b(i) = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sys(lambda_steps);
  if (sys.info() != Eigen::Success) throw NumericalError("hum_null_control: eigensolver failed");
  Eigen::VectorXd shifted = sys.eigenvalues().array() + out.rho;
  if (out.rho == 0.0) {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n) *
                         sys.eigenvalues().cwiseAbs().maxCoeff();
    if (sys.eigenvalues()(0) <= floor) throw NumericalError("hum_null_control: singular system at rho = 0");
  }
  const Eigen::VectorXd proj = sys.eigenvectors().transpose() * b;
  const Eigen::VectorXd eta = sys.eigenvectors() * proj.cwiseQuotient(shifted);
  out.duality_cost = std::sqrt(std::max(proj.dot(proj.cwiseQuotient(shifted)), 0.0));

  out.times.resize(static_cast<std::size_t>(steps));
  out.controls.resize(steps, n);
  double cost2 = 0.0;
  Eigen::VectorXd terminal = b;
  for (int k = 0; k < steps; ++k) {
    out.times[static_cast<std::size_t>(k)] = k * dt;
    const Eigen::VectorXd uk = -(m * e.col(k).cwiseProduct(eta)) / dt;
    cost2 += dt * uk.squaredNorm();
    terminal += e.col(k).cwiseProduct(m * uk);
    out.controls.row(k) = spec.synthesize(uk).transpose().cwiseProduct(mask.weights.transpose());
  }
  out.cost = std::sqrt(cost2);
  out.terminal = spec.synthesize(terminal);
  out.terminal_norm = terminal.norm();
  double observable2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::exp(-ev(i) * T) >= kUnobservableThreshold) observable2 += terminal(i) * terminal(i);
  out.terminal_norm_observable = std::sqrt(observable2);
  return out;
}

}  // namespace ucplab
