#include "ucplab/grid.hpp"

#include "ucplab/errors.hpp"

#include <algorithm>
#include <string>

namespace ucplab {

BoxDomain::BoxDomain(std::vector<Interval> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3)
    throw ConfigError("domain dimension must be 1, 2 or 3");
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto& a = axes_[i];
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi))
      throw ConfigError("domain axis " + std::to_string(i) + " must be finite");
    if (!(a.lo < a.hi))
      throw ConfigError("domain axis " + std::to_string(i) + " requires alpha < beta");
  }
}

BoxDomain BoxDomain::centered_cube(double side, int dim) {
  if (dim < 1 || dim > 3) throw ConfigError("domain dimension must be 1, 2 or 3");
  return BoxDomain(std::vector<Interval>(static_cast<std::size_t>(dim), Interval{-side / 2, side / 2}));
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.length();
  return v;
}

bool BoxDomain::contains(std::span<const double> x) const {
  if (x.size() != axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (!(x[i] > axes_[i].lo && x[i] < axes_[i].hi)) return false;
  return true;
}

Grid::Grid(BoxDomain domain, std::vector<int> points_per_axis, Boundary bc)
    : domain_(std::move(domain)), n_(std::move(points_per_axis)), bc_(bc) {
  if (static_cast<int>(n_.size()) != domain_.dim())
    throw ConfigError("points_per_axis has " + std::to_string(n_.size()) +
                      " entries, domain has dimension " + std::to_string(domain_.dim()));
  size_ = 1;
  for (int i = 0; i < dim(); ++i) {
    const int n = n_[static_cast<std::size_t>(i)];
    if (n < 1) throw ConfigError("points_per_axis must be positive");
    const double len = domain_.axis(i).length();
    h_.push_back(bc_ == Boundary::Dirichlet ? len / (n + 1) : len / n);
    size_ *= static_cast<std::size_t>(n);
    cell_volume_ *= h_.back();
  }
}

double Grid::coordinate(int axis, int k) const {
  const double lo = domain_.axis(axis).lo;
  const double h = spacing(axis);
  return bc_ == Boundary::Dirichlet ? lo + (k + 1) * h : lo + (k + 0.5) * h;
}

std::array<int, 3> Grid::multi_index(std::size_t index) const {
  std::array<int, 3> m{0, 0, 0};
  for (int i = 0; i < dim(); ++i) {
    const auto n = static_cast<std::size_t>(points(i));
    m[static_cast<std::size_t>(i)] = static_cast<int>(index % n);
    index /= n;
  }
  return m;
}

std::size_t Grid::linear_index(const std::array<int, 3>& multi) const {
  std::size_t index = 0;
  for (int i = dim() - 1; i >= 0; --i)
    index = index * static_cast<std::size_t>(points(i)) + static_cast<std::size_t>(multi[static_cast<std::size_t>(i)]);
  return index;
}

Point Grid::node(std::size_t index) const {
  const auto m = multi_index(index);
  Point x(dim());
  for (int i = 0; i < dim(); ++i) x(i) = coordinate(i, m[static_cast<std::size_t>(i)]);
  return x;
}

Grid build_grid(const BoxDomain& domain, const std::vector<int>& points_per_axis,
                Boundary bc, std::size_t node_cap) {
  if (static_cast<int>(points_per_axis.size()) != domain.dim())
    throw ConfigError("points_per_axis must have one entry per axis");
  double total = 1.0;
  for (int n : points_per_axis) {
    if (n < 2) throw ConfigError("points_per_axis entries must be >= 2");
    total *= n;
  }
  if (total > static_cast<double>(node_cap))
    throw ConfigError("grid cap exceeded: " + std::to_string(static_cast<long long>(total)) +
                      " nodes > cap " + std::to_string(node_cap));
  return Grid(domain, points_per_axis, bc);
}

Potential::Potential(Eigen::VectorXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw ConfigError("potential values must be finite");
  sup_norm_ = values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0;
}

Potential Potential::sample(const Grid& grid, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) v(static_cast<Eigen::Index>(k)) = f(grid.node(k));
  return Potential(std::move(v));
}

double Potential::min() const { return values_.size() ? values_.minCoeff() : 0.0; }
double Potential::max() const { return values_.size() ? values_.maxCoeff() : 0.0; }

Potential Potential::operator+(const Potential& other) const {
  if (other.size() != size()) throw ConfigError("potential size mismatch");
  return Potential(values_ + other.values_);
}

Potential Potential::scaled(double factor) const { return Potential(values_ * factor); }

Hamiltonian::Hamiltonian(std::shared_ptr<const Grid> grid, Potential potential, Eigen::MatrixXd matrix)
    : grid_(std::move(grid)), potential_(std::move(potential)), matrix_(std::move(matrix)) {}

Hamiltonian Hamiltonian::perturbed(const Potential& w, double t) const {
  if (w.size() != size()) throw ConfigError("perturbation size mismatch");
  Eigen::MatrixXd m = matrix_;
  m.diagonal() += t * w.values();
  return Hamiltonian(grid_, potential_ + w.scaled(t), std::move(m));
}

Eigen::MatrixXd negative_laplacian(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto m = grid.multi_index(k);
    const auto row = static_cast<Eigen::Index>(k);
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const double inv_h2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
      const int pos = m[static_cast<std::size_t>(axis)];
      for (int step : {-1, 1}) {
        const int nb = pos + step;
        if (nb >= 0 && nb < grid.points(axis)) {
          auto mn = m;
          mn[static_cast<std::size_t>(axis)] = nb;
          lap(row, static_cast<Eigen::Index>(grid.linear_index(mn))) -= inv_h2;
          lap(row, row) += inv_h2;
        } else if (grid.boundary() == Boundary::Dirichlet) {
          // Ghost node carries the homogeneous boundary value.
          lap(row, row) += inv_h2;
        }
        // Neumann: reflected ghost equals the node, flux vanishes.
      }
    }
  }
  return lap;
}

Hamiltonian assemble_hamiltonian(std::shared_ptr<const Grid> grid, const Potential& potential) {
  if (potential.size() != grid->size())
    throw ConfigError("potential has " + std::to_string(potential.size()) +
                      " values, grid has " + std::to_string(grid->size()) + " nodes");
  Eigen::MatrixXd m = negative_laplacian(*grid);
  m.diagonal() += potential.values();
  return Hamiltonian(std::move(grid), potential, std::move(m));
}

Hamiltonian assemble_hamiltonian(const Grid& grid, const Potential& potential) {
  return assemble_hamiltonian(std::make_shared<const Grid>(grid), potential);
}

}  // namespace ucplab
