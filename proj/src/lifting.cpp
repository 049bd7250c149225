#include "ucplab/lifting.hpp"

#include "ucplab/errors.hpp"
#include "ucplab/parallel.hpp"
#include "ucplab/ucp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ucplab {

std::vector<GapSpec> find_gaps(const Eigen::VectorXd& ev, double min_width) {
  std::vector<GapSpec> gaps;
  for (Eigen::Index k = 0; k + 1 < ev.size(); ++k)
    if (ev(k + 1) - ev(k) >= min_width && ev(k + 1) > ev(k))
      gaps.push_back({ev(k), ev(k + 1), static_cast<std::size_t>(k)});
  return gaps;
}

std::vector<GapSpec> find_gaps(const SpectralData& spec, double min_width) {
  return find_gaps(spec.eigenvalues, min_width);
}

LiftCurve lift_curve(const Hamiltonian& h, const Potential& w, const GapSpec& gap,
                     const std::vector<double>& t_samples, unsigned threads) {
  if (w.size() != h.size()) throw ConfigError("lift_curve: W size mismatch");
  if (w.min() < 0) throw ConfigError("lift_curve: W must be nonnegative");
  const double w_sup = w.sup_norm();
  if (!(w_sup > 0)) throw ConfigError("lift_curve: |W| must be positive");
  if (!(gap.b > gap.a)) throw ConfigError("lift_curve: gap requires a < b");
  const double t0 = gap.t0(w_sup);
  for (std::size_t k = 0; k < t_samples.size(); ++k) {
    if (!(t_samples[k] > -t0 && t_samples[k] < t0))
      throw ConfigError("lift_curve: sample t outside (-t0, t0)");
    if (k > 0 && !(t_samples[k] > t_samples[k - 1]))
      throw ConfigError("lift_curve: samples must be strictly increasing");
  }

  LiftCurve curve;
  curve.t = t_samples;
  curve.w_sup = w_sup;
  curve.gap = gap;
  const std::size_t n = t_samples.size();
  curve.f_minus.assign(n, std::numeric_limits<double>::quiet_NaN());
  curve.f_plus.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> degenerate(n, 0);

  parallel_for(n, threads, [&](std::size_t k) {
    const double t = t_samples[k];
    const Eigen::VectorXd ev = eigenvalues_only(h.perturbed(w, t));
    // Eigenvalues within rounding of a window edge count as on the edge, so the
    // strict inequalities survive exact shifts such as W = const.
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ev.cwiseAbs().maxCoeff());
    const double upper_window = gap.b - std::max(0.0, -t) * w_sup - tol;
    const double lower_window = gap.a + std::max(0.0, t) * w_sup + tol;
    const auto* begin = ev.data();
    const auto* end = begin + ev.size();
    const auto* below = std::lower_bound(begin, end, upper_window);  // first >= window
    const auto* above = std::upper_bound(begin, end, lower_window);  // first > window
    if (below != begin) curve.f_minus[k] = *(below - 1);
    if (above != end) curve.f_plus[k] = *above;
    degenerate[k] = (below == begin || above == end) ? 1 : 0;
  });
  curve.degenerate.assign(degenerate.begin(), degenerate.end());
  return curve;
}

double lift_theta(const Potential& w, const ObservationMask& mask) {
  if (mask.size() != w.size()) throw ConfigError("lift_theta: mask size mismatch");
  double theta = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mask.weights.size(); ++i)
    if (mask.weights(i) > 0) theta = std::min(theta, w.values()(i));
  return std::isfinite(theta) ? std::max(theta, 0.0) : 0.0;
}

double cuc_sup(const Potential& v, const Potential& w, double b, double G, double delta, double N) {
  double best = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    const Potential vt = v + w.scaled(t);
    best = std::max(best, eval_cuc(vt, b + w.sup_norm(), G, delta, N).value);
  }
  return best;
}

LipschitzReport check_lipschitz(const LiftCurve& curve, double theta, double cuc_sup_value) {
  if (curve.t.size() < 2) throw ConfigError("check_lipschitz: need at least two samples");
  if (!(theta > 0)) throw ConfigError("check_lipschitz: theta must be positive");
  LipschitzReport report;
  report.theta = theta;
  report.cuc_sup = cuc_sup_value;
  for (std::size_t k = 0; k + 1 < curve.t.size(); ++k) {
    if (curve.degenerate[k] || curve.degenerate[k + 1]) {
      std::ostringstream msg;
      msg << "t=" << curve.t[k] << ": degenerate window, increment skipped";
      report.violations.push_back(msg.str());
      continue;
    }
    LipschitzRow row;
    row.t = curve.t[k];
    row.eps = curve.t[k + 1] - curve.t[k];
    row.df_minus = curve.f_minus[k + 1] - curve.f_minus[k];
    row.df_plus = curve.f_plus[k + 1] - curve.f_plus[k];
    row.lower = row.eps * theta * cuc_sup_value;
    row.upper = row.eps * curve.w_sup;
    row.margin_lo = std::min(row.df_minus, row.df_plus) - row.lower;
    row.margin_hi = row.upper - std::max(row.df_minus, row.df_plus);
    const bool lo_ok = row.margin_lo >= -kLipschitzSlack;
    const bool hi_ok = row.margin_hi >= -kLipschitzSlack;
    row.ok = lo_ok && hi_ok;
    if (!lo_ok) {
      report.lower_ok = false;
      std::ostringstream msg;
      msg << "t=" << row.t << ": lower bound violated by " << -row.margin_lo;
      report.violations.push_back(msg.str());
    }
    if (!hi_ok) {
      report.upper_ok = false;
      std::ostringstream msg;
      msg << "t=" << row.t << ": upper bound violated by " << -row.margin_hi;
      report.violations.push_back(msg.str());
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace ucplab
