#pragma once

#include "ucplab/grid.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ucplab {

// One lattice cell (-G/2, G/2)^d + centre and the point z_j placed in it.
struct LatticePoint {
  std::vector<long> index;  // integer lattice coordinates
  Point center;             // cell centre
  Point z;
};

// Observation points, one per G-cell that meets the domain.
struct EquidistributedSequence {
  double G = 1.0;
  double delta = 0.25;
  std::vector<LatticePoint> points;
};

struct Violation {
  long position = -1;  // index into points, -1 for a global violation
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Cell centres of the lattice covering the domain. The lattice is the
// origin-centred one when (-G/2, G/2)^d lies inside the domain; otherwise it
// is translated so a cell sits at the domain's lower corner.
Point lattice_offset(const BoxDomain& domain, double G);
std::vector<LatticePoint> lattice_cells(const BoxDomain& domain, double G);

// The ball B(z, delta) must lie inside its cell and delta must be in (0, G/2).
ValidationReport validate_equidistributed(const EquidistributedSequence& z,
                                          const BoxDomain& domain);

// Every z_j uniform in the shrunken cell (-G/2 + delta, G/2 - delta)^d + j.
// Cells whose ball misses the domain are dropped.
EquidistributedSequence sample_equidistributed(double G, double delta, const BoxDomain& domain,
                                               std::uint64_t seed);

// All z_j at their cell centres.
EquidistributedSequence centered_equidistributed(double G, double delta, const BoxDomain& domain);

// 0/1 diagonal of the indicator of the union of balls, sampled at grid nodes.
struct ObservationMask {
  Eigen::VectorXd weights;
  double covered_fraction = 0.0;
  std::vector<std::string> warnings;

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return weights.cwiseProduct(f); }

  static ObservationMask full(std::size_t n);
  static ObservationMask empty(std::size_t n);
};

// Node x is observed iff |x - z_j| < delta for some j.
ObservationMask observation_mask(const Grid& grid, const EquidistributedSequence& z);

nlohmann::json to_json(const EquidistributedSequence& z);
EquidistributedSequence sequence_from_json(const nlohmann::json& j);

}  // namespace ucplab
