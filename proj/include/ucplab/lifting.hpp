#pragma once

#include "ucplab/geometry.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/spectral.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ucplab {

// Gap between two consecutive eigenvalues a < b. Finite matrices have no
// essential spectrum; the discrete spectrum of a supercell stands in for it.
struct GapSpec {
  double a = 0.0;
  double b = 0.0;
  std::size_t lower_index = 0;  // position of a in the sorted spectrum

  double width() const { return b - a; }
  double t0(double w_sup) const { return width() / w_sup; }
};

std::vector<GapSpec> find_gaps(const Eigen::VectorXd& sorted_eigenvalues, double min_width);
std::vector<GapSpec> find_gaps(const SpectralData& spec, double min_width);

struct LiftCurve {
  std::vector<double> t;
  std::vector<double> f_minus;  // NaN where the window holds no eigenvalue
  std::vector<double> f_plus;
  std::vector<bool> degenerate;
  double w_sup = 0.0;
  GapSpec gap;
};

// For each t, the spectrum of H + tW is computed and
//   f_-(t) = max{ lambda < b - t_- |W| },   f_+(t) = min{ lambda > a + t_+ |W| }.
// Samples must be strictly increasing inside (-t0, t0).
LiftCurve lift_curve(const Hamiltonian& h, const Potential& w, const GapSpec& gap,
                     const std::vector<double>& t_samples, unsigned threads = 1);

// Largest theta with W >= theta on every observed node (0 for an empty mask).
double lift_theta(const Potential& w, const ObservationMask& mask);

// max over t in {0, 0.1, ..., 1} of C_uc(V + tW, b + |W|).
double cuc_sup(const Potential& v, const Potential& w, double b, double G, double delta, double N);

struct LipschitzRow {
  double t = 0.0;
  double eps = 0.0;
  double df_minus = 0.0;
  double df_plus = 0.0;
  double lower = 0.0;  // eps * theta * cuc_sup
  double upper = 0.0;  // eps * |W|
  double margin_lo = 0.0;  // min(df) - lower
  double margin_hi = 0.0;  // upper - max(df)
  bool ok = true;
};

struct LipschitzReport {
  std::vector<LipschitzRow> rows;
  std::vector<std::string> violations;
  double theta = 0.0;
  double cuc_sup = 0.0;
  bool lower_ok = true;
  bool upper_ok = true;
  bool ok() const { return lower_ok && upper_ok; }
};

inline constexpr double kLipschitzSlack = 1e-10;

// eps theta cuc_sup <= f(t+eps) - f(t) <= eps |W| (+1e-10) for consecutive samples.
LipschitzReport check_lipschitz(const LiftCurve& curve, double theta, double cuc_sup_value);

}  // namespace ucplab
