#include "ucplab/errors.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/rng.hpp"
#include "ucplab/spectral.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

using namespace ucplab;

namespace {

std::shared_ptr<const Grid> unit_grid(int n, Boundary bc = Boundary::Dirichlet) {
  return std::make_shared<const Grid>(build_grid(BoxDomain({{0.0, 1.0}}), {n}, bc));
}

Potential random_potential(std::size_t n, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Potential(v);
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(Grid, DirichletUnitIntervalThreeNodes) {
  const Grid g = build_grid(BoxDomain({{0.0, 1.0}}), {3}, Boundary::Dirichlet);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.25);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 2), 0.75);
}

TEST(Grid, UnitSquareTwoByTwo) {
  const Grid g = build_grid(BoxDomain({{0.0, 1.0}, {0.0, 1.0}}), {2, 2}, Boundary::Dirichlet);
  EXPECT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g.spacing(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.spacing(1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 1.0 / 9.0);
}

TEST(Grid, CapExceeded) {
  try {
    build_grid(BoxDomain({{0.0, 1.0}}), {100000}, Boundary::Dirichlet, 5000);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid cap exceeded"), std::string::npos);
  }
}

TEST(Grid, RejectsBadCountsAndDomains) {
  EXPECT_THROW(build_grid(BoxDomain({{0.0, 1.0}}), {1}, Boundary::Dirichlet), ConfigError);
  EXPECT_THROW(build_grid(BoxDomain({{0.0, 1.0}}), {0}, Boundary::Dirichlet), ConfigError);
  EXPECT_THROW(BoxDomain({{1.0, 0.0}}), ConfigError);
  EXPECT_THROW(BoxDomain({{0.0, INFINITY}}), ConfigError);
  EXPECT_THROW(BoxDomain::centered_cube(1.0, 4), ConfigError);
}

TEST(Grid, IndexRoundTrip3D) {
  const Grid g = build_grid(BoxDomain({{0, 1}, {0, 2}, {-1, 1}}), {3, 4, 5}, Boundary::Neumann);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.linear_index(g.multi_index(i)), i);
  EXPECT_NEAR(g.cell_volume() * static_cast<double>(g.size()), g.domain().volume(), 1e-12);
}

TEST(Hamiltonian, ThreePointStencilTwoNodes) {
  const auto h = assemble_hamiltonian(unit_grid(2), Potential::zero(2));
  Eigen::Matrix2d expected;
  expected << 18, -9, -9, 18;
  EXPECT_TRUE(h.matrix().isApprox(expected, 1e-14));
}

TEST(Hamiltonian, NeumannAnnihilatesConstants) {
  for (int d = 1; d <= 3; ++d) {
    std::vector<Interval> axes(static_cast<std::size_t>(d), Interval{0.0, 1.0 + d});
    std::vector<int> n(static_cast<std::size_t>(d), 5 + d);
    auto grid = std::make_shared<const Grid>(build_grid(BoxDomain(axes), n, Boundary::Neumann));
    const auto h = assemble_hamiltonian(grid, Potential::zero(grid->size()));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid->size()));
    EXPECT_LT((h.matrix() * ones).cwiseAbs().maxCoeff(), 1e-10) << "d=" << d;
  }
}

TEST(Hamiltonian, ConstantPotentialShiftsDiagonal) {
  auto grid = std::make_shared<const Grid>(build_grid(BoxDomain({{0, 1}, {0, 1}}), {4, 3}, Boundary::Dirichlet));
  const auto h0 = assemble_hamiltonian(grid, Potential::zero(grid->size()));
  const auto h5 = assemble_hamiltonian(grid, Potential::constant(grid->size(), 5.0));
  const Eigen::MatrixXd diff = h5.matrix() - h0.matrix();
  EXPECT_TRUE(diff.isApprox(5.0 * Eigen::MatrixXd::Identity(diff.rows(), diff.cols())));
}

TEST(Hamiltonian, OffDiagonalStencilAndSymmetry) {
  auto grid = std::make_shared<const Grid>(build_grid(BoxDomain({{0, 1}, {0, 2}}), {4, 5}, Boundary::Dirichlet));
  const auto h = assemble_hamiltonian(grid, random_potential(grid->size(), 3, -1, 1));
  const auto& m = h.matrix();
  EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const double hx = grid->spacing(0), hy = grid->spacing(1);
  EXPECT_DOUBLE_EQ(m(0, 1), -1.0 / (hx * hx));
  EXPECT_DOUBLE_EQ(m(0, 4), -1.0 / (hy * hy));
  EXPECT_DOUBLE_EQ(m(0, 5), 0.0);
}

TEST(Hamiltonian, RejectsShapeMismatch) {
  EXPECT_THROW(assemble_hamiltonian(unit_grid(5), Potential::zero(4)), ConfigError);
}

TEST(Potential, SupNormIsMaxAbs) {
  Eigen::VectorXd v(4);
  v << 1.0, -3.5, 2.0, 0.0;
  const Potential p(v);
  EXPECT_EQ(p.sup_norm(), 3.5);
  EXPECT_EQ(p.min(), -3.5);
  EXPECT_EQ(p.max(), 2.0);
  EXPECT_THROW(Potential(Eigen::VectorXd::Constant(2, NAN)), ConfigError);
}

TEST(Eigendecompose, DirichletClosedForm) {
  for (int n : {31, 127}) {
    const auto spec = eigendecompose(assemble_hamiltonian(unit_grid(n), Potential::zero(static_cast<std::size_t>(n))));
    const double h = 1.0 / (n + 1);
    for (int j = 1; j <= n; ++j) {
      const double s = std::sin(j * std::numbers::pi / (2.0 * (n + 1)));
      const double exact = 4.0 / (h * h) * s * s;
      EXPECT_NEAR(spec.eigenvalues(j - 1), exact, 1e-10 * exact) << "n=" << n << " j=" << j;
    }
  }
}

TEST(Eigendecompose, TridiagonalPathMatchesDense) {
  const auto h = assemble_hamiltonian(unit_grid(80), random_potential(80, 11, 0, 4));
  const Eigen::VectorXd fast = eigenvalues_only(h);
  const auto spec = eigendecompose(h);
  EXPECT_LT((fast - spec.eigenvalues).cwiseAbs().maxCoeff(), 1e-9 * spec.eigenvalues.cwiseAbs().maxCoeff());
}

TEST(Eigendecompose, NeumannGroundStateIsConstant) {
  const auto grid = unit_grid(20, Boundary::Neumann);
  const auto spec = eigendecompose(assemble_hamiltonian(grid, Potential::zero(20)));
  EXPECT_NEAR(spec.eigenvalues(0), 0.0, 1e-9);
  const Eigen::VectorXd v = spec.eigenvectors.col(0);
  EXPECT_LT((v.array() - v(0)).abs().maxCoeff(), 1e-10);
  EXPECT_GT(v(0), 0.0);
  EXPECT_NEAR(grid->norm(v), 1.0, 1e-12);
}

TEST(Eigendecompose, DiagonalMatrix) {
  const auto spec = eigendecompose(Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_DOUBLE_EQ(spec.eigenvalues(0), 1.0);
  EXPECT_DOUBLE_EQ(spec.eigenvalues(1), 2.0);
  EXPECT_TRUE(spec.eigenvectors.isApprox(Eigen::Matrix2d::Identity()));
}

TEST(Eigendecompose, ResidualsAndWeightedOrthonormality) {
  auto grid = std::make_shared<const Grid>(build_grid(BoxDomain({{0, 2}, {0, 1}}), {9, 7}, Boundary::Neumann));
  const auto h = assemble_hamiltonian(grid, random_potential(grid->size(), 5, -2, 2));
  const auto spec = eigendecompose(h);
  const double hnorm = h.matrix().cwiseAbs().rowwise().sum().maxCoeff();
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    const Eigen::VectorXd r = h.matrix() * spec.eigenvectors.col(k) - spec.eigenvalues(k) * spec.eigenvectors.col(k);
    EXPECT_LE(r.norm() / spec.eigenvectors.col(k).norm(), 1e-10 * hnorm);
  }
  const Eigen::MatrixXd gram = grid->cell_volume() * spec.eigenvectors.transpose() * spec.eigenvectors;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index k = 1; k < spec.eigenvalues.size(); ++k) EXPECT_LE(spec.eigenvalues(k - 1), spec.eigenvalues(k));
}

TEST(Eigendecompose, DeterministicSignConvention) {
  const auto h = assemble_hamiltonian(unit_grid(40), random_potential(40, 8, -1, 1));
  const auto a = eigendecompose(h);
  const auto b = eigendecompose(h);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
  for (Eigen::Index k = 0; k < a.eigenvectors.cols(); ++k) {
    Eigen::Index first = 0;
    while (std::abs(a.eigenvectors(first, k)) < 1e-8 * a.eigenvectors.col(k).cwiseAbs().maxCoeff()) ++first;
    EXPECT_GT(a.eigenvectors(first, k), 0.0);
  }
}

TEST(SpectralSubspace, EdgeCases) {
  const auto spec = eigendecompose(assemble_hamiltonian(unit_grid(15), Potential::zero(15)));
  EXPECT_EQ(spectral_subspace(spec, spec.eigenvalues(0) - 1.0).cols(), 0);
  EXPECT_EQ(spectral_subspace(spec, spec.eigenvalues(14)).cols(), 15);
  const Eigen::MatrixXd ground = spectral_subspace(spec, spec.eigenvalues(0));
  ASSERT_EQ(ground.cols(), 1);
  EXPECT_TRUE(ground.col(0).isApprox(spec.eigenvectors.col(0)));
}

TEST(Semigroup, DiagonalExample) {
  const auto spec = eigendecompose(Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix(), 1.0);
  const Eigen::VectorXd out = semigroup_apply(spec, std::log(2.0), Eigen::Vector2d(1.0, 1.0));
  EXPECT_NEAR(out(0), 0.5, 1e-15);
  EXPECT_NEAR(out(1), 0.25, 1e-15);
  EXPECT_THROW(semigroup_apply(spec, -1.0, Eigen::Vector2d(1.0, 1.0)), ConfigError);
}

TEST(Semigroup, IdentityAtZeroAndEigenvectorDecay) {
  const auto spec = eigendecompose(assemble_hamiltonian(unit_grid(30), random_potential(30, 2, 0, 3)));
  const Eigen::VectorXd f = random_vector(30, 4);
  EXPECT_LT((semigroup_apply(spec, 0.0, f) - f).norm(), 1e-12 * f.norm());
  const Eigen::VectorXd v = spec.eigenvectors.col(3);
  const double t = 0.01;
  EXPECT_LT((semigroup_apply(spec, t, v) - std::exp(-spec.eigenvalues(3) * t) * v).norm(), 1e-12 * v.norm());
}

TEST(Semigroup, MatchesMatrixExponential) {
  // Independent oracle: Pade matrix exponential of the symmetrized operator.
  auto grid = unit_grid(12);
  const auto h = assemble_hamiltonian(grid, random_potential(12, 9, -1, 1));
  const auto spec = eigendecompose(h);
  const Eigen::VectorXd f = random_vector(12, 10);
  const double t = 0.003;
  const Eigen::MatrixXd e = (-t * h.matrix()).exp();
  EXPECT_LT((semigroup_apply(spec, t, f) - e * f).norm(), 1e-10 * f.norm());
}

TEST(Semigroup, LawOnRandomInstances) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(derive_seed(77, 1, s));
    const int n = 20 + static_cast<int>(rng.uniform() * 100);
    const auto grid = unit_grid(n, s % 2 ? Boundary::Neumann : Boundary::Dirichlet);
    const auto spec = eigendecompose(assemble_hamiltonian(grid, random_potential(static_cast<std::size_t>(n), s, -5, 5)));
    const Eigen::VectorXd f = random_vector(n, s + 100);
    const double a = rng.uniform(0, 2), b = rng.uniform(0, 2);
    const Eigen::VectorXd lhs = semigroup_apply(spec, a, semigroup_apply(spec, b, f));
    const Eigen::VectorXd rhs = semigroup_apply(spec, a + b, f);
    EXPECT_LE(grid->norm(lhs - rhs), 1e-10 * grid->norm(f) * std::max(1.0, grid->norm(rhs) / grid->norm(f)));
  }
}

TEST(Semigroup, MonotoneDecayForNonnegativePotential) {
  const auto grid = unit_grid(50);
  const auto spec = eigendecompose(assemble_hamiltonian(grid, random_potential(50, 21, 0, 10)));
  const Eigen::VectorXd f = random_vector(50, 22);
  double prev = grid->norm(f);
  for (double t = 0.0005; t < 0.2; t *= 1.5) {
    const double cur = grid->norm(semigroup_apply(spec, t, f));
    EXPECT_LE(cur, prev * (1 + 1e-14));
    prev = cur;
  }
}

TEST(CountEigenvalues, Examples) {
  const Eigen::Vector3d d(1.0, 2.0, 5.0);
  const auto spec = eigendecompose(d.asDiagonal().toDenseMatrix(), 1.0);
  EXPECT_EQ(count_eigenvalues(spec, 1.5, 5.0), 2u);
  EXPECT_EQ(count_eigenvalues(spec, 1.0, 5.0), 3u);
  EXPECT_EQ(count_eigenvalues(spec, 2.5, 4.5), 0u);
  EXPECT_EQ(count_in_window(spec, 3.0, 100.0), 3u);
  EXPECT_THROW(count_in_window(spec, 3.0, -1.0), ConfigError);
}

TEST(CountEigenvalues, MonotoneAndAdditive) {
  const auto spec = eigendecompose(assemble_hamiltonian(unit_grid(60), random_potential(60, 31, 0, 50)));
  std::size_t prev = 0;
  for (double eps = 0.0; eps < 2000.0; eps += 37.0) {
    const std::size_t c = count_in_window(spec, 1000.0, eps);
    EXPECT_GE(c, prev);
    prev = c;
  }
  const double a = 100.0, b = 3000.0, c = 9000.0;
  EXPECT_EQ(count_eigenvalues(spec, a, c),
            count_eigenvalues(spec, a, b) + count_eigenvalues(spec, std::nextafter(b, INFINITY), c));
}
