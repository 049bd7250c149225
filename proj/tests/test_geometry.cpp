#include "ucplab/errors.hpp"
#include "ucplab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ucplab;

namespace {

bool has_global(const ValidationReport& r, const std::string& reason) {
  for (const auto& v : r.violations)
    if (v.position == -1 && v.reason == reason) return true;
  return false;
}

}  // namespace

TEST(Lattice, OriginCenteredWhenCellInside) {
  const auto dom = BoxDomain::centered_cube(5.0, 2);
  EXPECT_TRUE(lattice_offset(dom, 1.0).isZero());
  EXPECT_EQ(lattice_cells(dom, 1.0).size(), 25u);
}

TEST(Lattice, TranslatedToCornerOtherwise) {
  const BoxDomain dom({{2.0, 4.5}});
  const Point off = lattice_offset(dom, 1.0);
  EXPECT_DOUBLE_EQ(off(0), 2.5);
  const auto cells = lattice_cells(dom, 1.0);
  ASSERT_EQ(cells.size(), 3u);  // centres 2.5, 3.5, 4.5 (last cell half outside)
  EXPECT_DOUBLE_EQ(cells.back().center(0), 4.5);
}

TEST(Validate, CenteredQuarterBallsOk) {
  const auto dom = BoxDomain::centered_cube(4.0, 2);
  EXPECT_TRUE(validate_equidistributed(centered_equidistributed(1.0, 0.25, dom), dom).ok());
}

TEST(Validate, DeltaHalfCellRejected) {
  const auto dom = BoxDomain::centered_cube(3.0, 1);
  auto z = centered_equidistributed(1.0, 0.25, dom);
  z.delta = 0.5;
  EXPECT_TRUE(has_global(validate_equidistributed(z, dom), "delta not in (0, G/2)"));
  EXPECT_THROW(sample_equidistributed(1.0, 0.5, dom, 1), ConfigError);
  EXPECT_THROW(centered_equidistributed(1.0, 0.0, dom), ConfigError);
}

TEST(Validate, CornerPointFlagged) {
  const auto dom = BoxDomain::centered_cube(3.0, 2);
  auto z = centered_equidistributed(1.0, 0.25, dom);
  const std::size_t j = 4;
  z.points[j].z = z.points[j].center + Point::Constant(2, 0.5);
  const auto r = validate_equidistributed(z, dom);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].position, static_cast<long>(j));
}

TEST(Sample, DeterministicUnderSeed) {
  const auto dom = BoxDomain::centered_cube(6.0, 2);
  const auto a = sample_equidistributed(1.0, 0.2, dom, 99);
  const auto b = sample_equidistributed(1.0, 0.2, dom, 99);
  const auto c = sample_equidistributed(1.0, 0.2, dom, 100);
  ASSERT_EQ(a.points.size(), b.points.size());
  bool differs = false;
  for (std::size_t j = 0; j < a.points.size(); ++j) {
    EXPECT_EQ(a.points[j].z, b.points[j].z);
    differs = differs || a.points[j].z != c.points[j].z;
  }
  EXPECT_TRUE(differs);
}

TEST(Sample, NearHalfCellDegeneratesToCenters) {
  const auto dom = BoxDomain::centered_cube(4.0, 3);
  const auto z = sample_equidistributed(1.0, 0.5 - 1e-9, dom, 5);
  for (const auto& p : z.points) EXPECT_LT((p.z - p.center).cwiseAbs().maxCoeff(), 2e-9);
}

TEST(Sample, AlwaysValidatesOverManySeeds) {
  const BoxDomain dom({{-2.3, 3.1}, {0.2, 2.9}});
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const double delta = 0.05 + 0.4 * static_cast<double>(s % 9) / 9.0;
    const auto z = sample_equidistributed(1.0, delta, dom, s);
    ASSERT_TRUE(validate_equidistributed(z, dom).ok()) << "seed " << s;
    for (const auto& p : z.points)
      for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(p.z(i) - p.center(i)), 0.5 - delta + 1e-12);
  }
}

TEST(Sample, SitesKeyedByLatticeIndex) {
  // A point's position depends on its lattice index, not on the box it lives in.
  const auto small = sample_equidistributed(1.0, 0.1, BoxDomain::centered_cube(3.0, 1), 17);
  const auto large = sample_equidistributed(1.0, 0.1, BoxDomain::centered_cube(9.0, 1), 17);
  for (const auto& p : small.points)
    for (const auto& q : large.points)
      if (p.index == q.index) {
        EXPECT_EQ(p.z, q.z);
      }
}

TEST(Mask, FractionMatchesFineCount) {
  const auto dom = BoxDomain::centered_cube(9.0, 1);  // tiled exactly by unit cells
  const Grid grid = build_grid(dom, {899}, Boundary::Dirichlet);
  const auto z = sample_equidistributed(1.0, 0.25, dom, 3);
  const auto mask = observation_mask(grid, z);
  // Oracle: fraction of a very fine uniform partition that lies in the union of intervals.
  const int fine = 2000000;
  long inside = 0;
  for (int k = 0; k < fine; ++k) {
    const double x = dom.axis(0).lo + (k + 0.5) * dom.axis(0).length() / fine;
    for (const auto& p : z.points)
      if (std::abs(x - p.z(0)) < 0.25) {
        ++inside;
        break;
      }
  }
  const double exact = static_cast<double>(inside) / fine;
  EXPECT_NEAR(exact, 0.5, 1e-3);
  EXPECT_NEAR(mask.covered_fraction, exact, 2e-3);
}

TEST(Mask, FractionConvergesUnderRefinement) {
  const auto dom = BoxDomain::centered_cube(4.0, 2);
  const auto z = sample_equidistributed(1.0, 0.3, dom, 12);
  const double analytic = M_PI * 0.3 * 0.3;
  const double coarse = observation_mask(build_grid(dom, {40, 40}, Boundary::Dirichlet), z).covered_fraction;
  const double fine = observation_mask(build_grid(dom, {70, 70}, Boundary::Dirichlet), z).covered_fraction;
  EXPECT_NEAR(coarse / analytic, 1.0, 0.1);
  EXPECT_NEAR(fine / analytic, 1.0, 0.1);
  EXPECT_NEAR(coarse / fine, 1.0, 0.1);
}

TEST(Mask, SupportInsideBallsAndIdempotent) {
  const auto dom = BoxDomain::centered_cube(3.0, 2);
  const Grid grid = build_grid(dom, {31, 31}, Boundary::Neumann);
  const auto z = sample_equidistributed(1.0, 0.2, dom, 8);
  const auto mask = observation_mask(grid, z);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double best = INFINITY;
    for (const auto& p : z.points) best = std::min(best, (grid.node(k) - p.z).norm());
    EXPECT_EQ(mask.weights(static_cast<Eigen::Index>(k)) == 1.0, best < 0.2) << k;
  }
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(grid.size()), -1, 1);
  EXPECT_EQ(mask.apply(mask.apply(f)), mask.apply(f));
}

TEST(Mask, WarnsOnEmptyBall) {
  const auto dom = BoxDomain::centered_cube(3.0, 1);
  const Grid grid = build_grid(dom, {5}, Boundary::Dirichlet);  // h = 0.5
  EquidistributedSequence z = centered_equidistributed(1.0, 0.1, dom);
  for (auto& p : z.points) p.z(0) += 0.2;  // keep balls away from every node
  const auto mask = observation_mask(grid, z);
  EXPECT_FALSE(mask.warnings.empty());
}

TEST(Mask, BoundaryCellsKeptOnlyIfBallMeetsDomain) {
  const BoxDomain dom({{-1.6, 1.6}});
  const auto z = centered_equidistributed(1.0, 0.05, dom);
  // centres -2..2; cells at +-2 reach into the domain but their balls do not.
  ASSERT_EQ(z.points.size(), 3u);
}

TEST(Json, RoundTrip) {
  const auto dom = BoxDomain::centered_cube(3.0, 2);
  const auto z = sample_equidistributed(1.0, 0.2, dom, 4);
  const auto back = sequence_from_json(nlohmann::json::parse(to_json(z).dump()));
  EXPECT_EQ(back.G, z.G);
  EXPECT_EQ(back.delta, z.delta);
  ASSERT_EQ(back.points.size(), z.points.size());
  for (std::size_t j = 0; j < z.points.size(); ++j) {
    EXPECT_EQ(back.points[j].index, z.points[j].index);
    EXPECT_EQ(back.points[j].z, z.points[j].z);
  }
}
