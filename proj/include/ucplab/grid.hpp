#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ucplab {

inline constexpr std::size_t kDefaultNodeCap = 5000;

enum class Boundary { Dirichlet, Neumann };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

// Axis-parallel open box (alpha_1, beta_1) x ... x (alpha_d, beta_d), d <= 3.
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<Interval> axes);

  // (-L/2, L/2)^d
  static BoxDomain centered_cube(double side, int dim);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Interval& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  const std::vector<Interval>& axes() const { return axes_; }
  double volume() const;
  bool contains(std::span<const double> x) const;

 private:
  std::vector<Interval> axes_;
};

using Point = Eigen::VectorXd;

// Uniform tensor grid. Dirichlet grids place n interior nodes at
// alpha + (k+1) h with h = length/(n+1); Neumann grids are cell-centred,
// nodes at alpha + (k+1/2) h with h = length/n. Node indices are linear with
// axis 0 varying fastest.
class Grid {
 public:
  Grid(BoxDomain domain, std::vector<int> points_per_axis, Boundary bc);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  Boundary boundary() const { return bc_; }
  int points(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& points() const { return n_; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return size_; }

  // Product of the spacings; the weight of every node in the discrete L2
  // inner product.
  double cell_volume() const { return cell_volume_; }

  double coordinate(int axis, int k) const;
  Point node(std::size_t index) const;
  std::array<int, 3> multi_index(std::size_t index) const;
  std::size_t linear_index(const std::array<int, 3>& multi) const;

  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return cell_volume_ * a.dot(b);
  }
  double norm(const Eigen::VectorXd& a) const { return std::sqrt(inner(a, a)); }

 private:
  BoxDomain domain_;
  std::vector<int> n_;
  std::vector<double> h_;
  Boundary bc_;
  std::size_t size_ = 0;
  double cell_volume_ = 1.0;
};

Grid build_grid(const BoxDomain& domain, const std::vector<int>& points_per_axis,
                Boundary bc, std::size_t node_cap = kDefaultNodeCap);

// Nodal potential; sup norm cached at construction.
class Potential {
 public:
  Potential() = default;
  explicit Potential(Eigen::VectorXd values);

  static Potential zero(std::size_t n) { return Potential(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))); }
  static Potential constant(std::size_t n, double v) {
    return Potential(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), v));
  }
  static Potential sample(const Grid& grid, const std::function<double(const Point&)>& f);

  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double sup_norm() const { return sup_norm_; }
  double min() const;
  double max() const;

  Potential operator+(const Potential& other) const;
  Potential scaled(double factor) const;

 private:
  Eigen::VectorXd values_;
  double sup_norm_ = 0.0;
};

// H = -Delta + V as a dense symmetric matrix acting on nodal values.
class Hamiltonian {
 public:
  Hamiltonian(std::shared_ptr<const Grid> grid, Potential potential, Eigen::MatrixXd matrix);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const Potential& potential() const { return potential_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }

  // Same kinetic part, potential replaced by V + t W.
  Hamiltonian perturbed(const Potential& w, double t) const;

  // Tridiagonal when the grid is one dimensional.
  bool is_tridiagonal() const { return grid_->dim() == 1; }

 private:
  std::shared_ptr<const Grid> grid_;
  Potential potential_;
  Eigen::MatrixXd matrix_;
};

// Discrete negative Laplacian with the grid's boundary condition.
Eigen::MatrixXd negative_laplacian(const Grid& grid);

Hamiltonian assemble_hamiltonian(std::shared_ptr<const Grid> grid, const Potential& potential);
Hamiltonian assemble_hamiltonian(const Grid& grid, const Potential& potential);

}  // namespace ucplab
