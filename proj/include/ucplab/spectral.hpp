#pragma once

#include "ucplab/grid.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace ucplab {

inline constexpr double kDefaultEigenTolerance = 1e-10;

// Full eigendecomposition of a symmetric operator. Eigenvectors are
// orthonormal in the cell-volume weighted inner product, so they represent
// L2-normalised functions regardless of resolution.
struct SpectralData {
  Eigen::VectorXd eigenvalues;    // ascending
  Eigen::MatrixXd eigenvectors;   // columns, weighted-orthonormal
  double cell_volume = 1.0;
  double residual = 0.0;          // max_k |H v_k - lambda_k v_k| / |H|
  double orthogonality = 0.0;     // max |<v_k, v_l>_h - delta_kl|

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double ground_energy() const { return eigenvalues(0); }

  // Columns sqrt(cell_volume) * v_k: orthonormal in the Euclidean product.
  Eigen::MatrixXd unit_basis() const { return eigenvectors * std::sqrt(cell_volume); }

  // Expansion coefficients <v_k, f>_h.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const;
  // Inverse of coefficients().
  Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
};

// Throws NumericalError if the residual or orthogonality exceeds tol.
// Eigenvector signs are fixed so the first component above 1e-12 of the
// vector's max magnitude is positive.
SpectralData eigendecompose(const Eigen::MatrixXd& symmetric, double cell_volume,
                            double tol = kDefaultEigenTolerance);
SpectralData eigendecompose(const Hamiltonian& h, double tol = kDefaultEigenTolerance);

// Eigenvalues only, ascending. Uses the tridiagonal QR path in one dimension.
Eigen::VectorXd eigenvalues_only(const Hamiltonian& h);

// Weighted-orthonormal basis of span{v_k : lambda_k <= energy}; may have zero columns.
Eigen::MatrixXd spectral_subspace(const SpectralData& spec, double energy);
std::size_t subspace_dimension(const SpectralData& spec, double energy);

// e^{-Ht} f by spectral calculus.
Eigen::VectorXd semigroup_apply(const SpectralData& spec, double t, const Eigen::VectorXd& f);

// Number of eigenvalues in the closed interval [lo, hi].
std::size_t count_eigenvalues(const Eigen::VectorXd& sorted_eigenvalues, double lo, double hi);
std::size_t count_eigenvalues(const SpectralData& spec, double lo, double hi);
// Tr 1_{[E-eps, E+eps]}(H).
std::size_t count_in_window(const SpectralData& spec, double energy, double eps);

}  // namespace ucplab
