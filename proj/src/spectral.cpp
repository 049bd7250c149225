#include "ucplab/spectral.hpp"

#include "ucplab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace ucplab {

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    auto col = vectors.col(k);
    const double threshold = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > threshold) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
  }
}

}  // namespace

Eigen::VectorXd SpectralData::coefficients(const Eigen::VectorXd& f) const {
  return cell_volume * (eigenvectors.transpose() * f);
}

Eigen::VectorXd SpectralData::synthesize(const Eigen::VectorXd& coeffs) const {
  return eigenvectors * coeffs;
}

SpectralData eigendecompose(const Eigen::MatrixXd& symmetric, double cell_volume, double tol) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0)
    throw ConfigError("eigendecompose: matrix must be square and nonempty");
  if (!(cell_volume > 0)) throw ConfigError("eigendecompose: cell volume must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver did not converge");

  Eigen::MatrixXd unit = solver.eigenvectors();
  fix_signs(unit);

  SpectralData spec;
  spec.eigenvalues = solver.eigenvalues();
  spec.cell_volume = cell_volume;

  const double scale = std::max(symmetric.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const Eigen::MatrixXd r = symmetric * unit - unit * spec.eigenvalues.asDiagonal();
  spec.residual = r.colwise().norm().maxCoeff() / scale;
  const auto n = unit.cols();
  spec.orthogonality = (unit.transpose() * unit - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (spec.residual > tol || spec.orthogonality > tol)
    throw NumericalError("eigendecompose: residual " + std::to_string(spec.residual) +
                         " / orthogonality " + std::to_string(spec.orthogonality) +
                         " exceed tolerance " + std::to_string(tol));
  spec.eigenvectors = unit / std::sqrt(cell_volume);
  return spec;
}

SpectralData eigendecompose(const Hamiltonian& h, double tol) {
  return eigendecompose(h.matrix(), h.grid().cell_volume(), tol);
}

Eigen::VectorXd eigenvalues_only(const Hamiltonian& h) {
  const Eigen::MatrixXd& m = h.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  if (h.is_tridiagonal() && m.rows() > 1) {
    const Eigen::VectorXd diag = m.diagonal();
    const Eigen::VectorXd sub = m.diagonal(-1);
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  } else {
    solver.compute(m, Eigen::EigenvaluesOnly);
  }
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues_only: solver did not converge");
  return solver.eigenvalues();
}

std::size_t subspace_dimension(const SpectralData& spec, double energy) {
  const auto* begin = spec.eigenvalues.data();
  const auto* end = begin + spec.eigenvalues.size();
  return static_cast<std::size_t>(std::upper_bound(begin, end, energy) - begin);
}

Eigen::MatrixXd spectral_subspace(const SpectralData& spec, double energy) {
  return spec.eigenvectors.leftCols(static_cast<Eigen::Index>(subspace_dimension(spec, energy)));
}

Eigen::VectorXd semigroup_apply(const SpectralData& spec, double t, const Eigen::VectorXd& f) {
  if (!(t >= 0)) throw ConfigError("semigroup_apply: t must be >= 0");
  if (static_cast<std::size_t>(f.size()) != spec.size()) throw ConfigError("semigroup_apply: size mismatch");
  const Eigen::VectorXd c = spec.coefficients(f);
  const Eigen::VectorXd decay = (-t * spec.eigenvalues.array()).exp().matrix();
  return spec.synthesize(c.cwiseProduct(decay));
}

std::size_t count_eigenvalues(const Eigen::VectorXd& sorted, double lo, double hi) {
  if (hi < lo) return 0;
  const auto* begin = sorted.data();
  const auto* end = begin + sorted.size();
  return static_cast<std::size_t>(std::upper_bound(begin, end, hi) - std::lower_bound(begin, end, lo));
}

std::size_t count_eigenvalues(const SpectralData& spec, double lo, double hi) {
  return count_eigenvalues(spec.eigenvalues, lo, hi);
}

std::size_t count_in_window(const SpectralData& spec, double energy, double eps) {
  if (!(eps >= 0)) throw ConfigError("count_in_window: eps must be >= 0");
  return count_eigenvalues(spec.eigenvalues, energy - eps, energy + eps);
}

}  // namespace ucplab
