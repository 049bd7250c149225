#include "ucplab/geometry.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/rng.hpp"

#include <cmath>
#include <sstream>

namespace ucplab {

namespace {

constexpr std::uint64_t kStreamSequence = 0x5e9e7ce;

bool origin_cell_inside(const BoxDomain& domain, double G) {
  for (const auto& a : domain.axes())
    if (!(a.lo <= -G / 2 && a.hi >= G / 2)) return false;
  return true;
}

// Squared distance from x to the closed box.
double distance2_to_box(const Point& x, const BoxDomain& domain) {
  double d2 = 0.0;
  for (int i = 0; i < domain.dim(); ++i) {
    const auto& a = domain.axis(i);
    const double gap = x(i) < a.lo ? a.lo - x(i) : (x(i) > a.hi ? x(i) - a.hi : 0.0);
    d2 += gap * gap;
  }
  return d2;
}

void check_delta(double G, double delta) {
  if (!(G > 0)) throw ConfigError("G must be positive");
  if (!(delta > 0 && delta < G / 2)) throw ConfigError("delta not in (0, G/2)");
}

}  // namespace

Point lattice_offset(const BoxDomain& domain, double G) {
  Point off = Point::Zero(domain.dim());
  if (origin_cell_inside(domain, G)) return off;
  for (int i = 0; i < domain.dim(); ++i) off(i) = domain.axis(i).lo + G / 2;
  return off;
}

std::vector<LatticePoint> lattice_cells(const BoxDomain& domain, double G) {
  if (!(G > 0)) throw ConfigError("G must be positive");
  const int d = domain.dim();
  const Point off = lattice_offset(domain, G);
  std::vector<std::vector<long>> ranges(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto& a = domain.axis(i);
    // Open cell (c - G/2, c + G/2) meets (lo, hi) iff lo - G/2 < c < hi + G/2.
    long k = static_cast<long>(std::floor((a.lo - G / 2 - off(i)) / G));
    for (; off(i) + k * G < a.hi + G / 2; ++k)
      if (off(i) + k * G > a.lo - G / 2) ranges[static_cast<std::size_t>(i)].push_back(k);
  }
  std::vector<LatticePoint> cells;
  std::vector<std::size_t> counter(static_cast<std::size_t>(d), 0);
  for (const auto& r : ranges)
    if (r.empty()) return cells;
  while (true) {
    LatticePoint p;
    p.index.resize(static_cast<std::size_t>(d));
    p.center = Point(d);
    for (int i = 0; i < d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      p.index[ui] = ranges[ui][counter[ui]];
      p.center(i) = off(i) + static_cast<double>(p.index[ui]) * G;
    }
    p.z = p.center;
    cells.push_back(std::move(p));
    int axis = 0;
    for (; axis < d; ++axis) {
      const auto ua = static_cast<std::size_t>(axis);
      if (++counter[ua] < ranges[ua].size()) break;
      counter[ua] = 0;
    }
    if (axis == d) break;
  }
  return cells;
}

ValidationReport validate_equidistributed(const EquidistributedSequence& z, const BoxDomain& domain) {
  ValidationReport report;
  if (!(z.G > 0)) report.violations.push_back({-1, "G must be positive"});
  if (!(z.delta > 0 && z.delta < z.G / 2)) report.violations.push_back({-1, "delta not in (0, G/2)"});
  const double slack = 1e-12 * z.G;
  for (std::size_t j = 0; j < z.points.size(); ++j) {
    const auto& p = z.points[j];
    if (p.z.size() != domain.dim() || p.center.size() != domain.dim()) {
      report.violations.push_back({static_cast<long>(j), "dimension mismatch"});
      continue;
    }
    for (int i = 0; i < domain.dim(); ++i) {
      if (std::abs(p.z(i) - p.center(i)) + z.delta > z.G / 2 + slack) {
        std::ostringstream msg;
        msg << "ball around z_" << j << " leaves its cell along axis " << i;
        report.violations.push_back({static_cast<long>(j), msg.str()});
        break;
      }
    }
  }
  return report;
}

EquidistributedSequence sample_equidistributed(double G, double delta, const BoxDomain& domain,
                                               std::uint64_t seed) {
  check_delta(G, delta);
  EquidistributedSequence seq{G, delta, {}};
  const double half = G / 2 - delta;
  for (auto& cell : lattice_cells(domain, G)) {
    Rng rng(site_seed(seed, kStreamSequence, cell.index));
    for (int i = 0; i < domain.dim(); ++i) cell.z(i) = cell.center(i) + rng.uniform(-half, half);
    if (distance2_to_box(cell.z, domain) < delta * delta) seq.points.push_back(std::move(cell));
  }
  const auto report = validate_equidistributed(seq, domain);
  if (!report.ok()) throw NumericalError("sampled sequence failed validation: " + report.violations.front().reason);
  return seq;
}

EquidistributedSequence centered_equidistributed(double G, double delta, const BoxDomain& domain) {
  check_delta(G, delta);
  EquidistributedSequence seq{G, delta, {}};
  for (auto& cell : lattice_cells(domain, G))
    if (distance2_to_box(cell.z, domain) < delta * delta) seq.points.push_back(std::move(cell));
  return seq;
}

ObservationMask ObservationMask::full(std::size_t n) {
  return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), 1.0, {}};
}

ObservationMask ObservationMask::empty(std::size_t n) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), 0.0, {}};
}

ObservationMask observation_mask(const Grid& grid, const EquidistributedSequence& z) {
  ObservationMask mask = ObservationMask::empty(grid.size());
  const double r2 = z.delta * z.delta;
  std::vector<std::size_t> hits(z.points.size(), 0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    for (std::size_t j = 0; j < z.points.size(); ++j) {
      if ((x - z.points[j].z).squaredNorm() < r2) {
        mask.weights(static_cast<Eigen::Index>(k)) = 1.0;
        ++hits[j];
      }
    }
  }
  for (std::size_t j = 0; j < hits.size(); ++j) {
    if (hits[j] == 0) {
      std::ostringstream msg;
      msg << "ball " << j << " contains no grid node";
      mask.warnings.push_back(msg.str());
    }
  }
  mask.covered_fraction = grid.size() ? mask.weights.sum() / static_cast<double>(grid.size()) : 0.0;
  return mask;
}

nlohmann::json to_json(const EquidistributedSequence& z) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : z.points) {
    points.push_back({{"j", p.index},
                      {"center", std::vector<double>(p.center.data(), p.center.data() + p.center.size())},
                      {"z", std::vector<double>(p.z.data(), p.z.data() + p.z.size())}});
  }
  return {{"G", z.G}, {"delta", z.delta}, {"points", points}};
}

EquidistributedSequence sequence_from_json(const nlohmann::json& j) {
  EquidistributedSequence z;
  z.G = j.at("G").get<double>();
  z.delta = j.at("delta").get<double>();
  for (const auto& p : j.at("points")) {
    LatticePoint lp;
    lp.index = p.at("j").get<std::vector<long>>();
    const auto c = p.at("center").get<std::vector<double>>();
    const auto x = p.at("z").get<std::vector<double>>();
    lp.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    lp.z = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    z.points.push_back(std::move(lp));
  }
  return z;
}

}  // namespace ucplab
