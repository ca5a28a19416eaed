#pragma once

#include <cstddef>
#include <vector>

#include "casclab/generator.hpp"
#include "casclab/stats.hpp"

namespace casclab {

enum class LaplaceMethod { empirical, iterated };

// Tabulated Laplace transform phi(t) = E exp(-t Y) on a log grid.
// Values are stored as log phi so the far tail (phi down to e^{-1000} and
// beyond) never underflows. phi is non-increasing with phi <= 1; violation
// of either is a bug, not a data condition.
struct LaplaceTable {
  std::vector<double> t;
  std::vector<double> log_phi;
  std::vector<double> std_error;  // empirical only; linear scale
  LaplaceMethod method = LaplaceMethod::iterated;

  std::size_t per_octave = 0;  // > 0 when built by make_log_grid

  // iterated metadata
  std::size_t iterations = 0;
  double final_sup_change = 0.0;
  bool converged = false;
  double tol = 0.0;
  unsigned quad_order = 0;
  double tail_mass_per_step = 0.0;
  // One-sided absolute uncertainty on phi: tail truncation plus the
  // convergence cutoff, with a 10x safety factor.
  double error_bracket = 0.0;
  double gamma_hint = 2.0;  // slope ceiling for beyond-grid extrapolation

  // empirical metadata
  std::size_t sample_count = 0;

  double phi(std::size_t i) const;
};

// Log-spaced grid with an exact octave structure: points_request is rounded
// so that a whole number of points per octave fits and t[i + per_octave] is
// bitwise equal to 2 * t[i]. The top point may overshoot t_max by < 2x.
struct LogGrid {
  std::vector<double> t;
  std::size_t per_octave = 0;
};
LogGrid make_log_grid(double t_min, double t_max, std::size_t points_request);

// Evaluates log phi(t) from the table: exact nodes on the grid, linear
// interpolation in (log t, log phi) between nodes, phi := e^{-t} below the
// grid (exact for the degenerate fixed point and first-order correct for any
// unit-mean Y), and beyond the grid a linear extrapolation in
// (log log t, log log 1/phi) with slope clamped to [1, gamma_hint].
// Throws past 1.5x the grid span in log t.
double log_phi_at(const LaplaceTable& table, double t);
double phi_at(const LaplaceTable& table, double t);

// Empirical transform of a positive sample. Stable in the far tail via a
// shifted exponential sum; std_error is the per-point standard error of the
// mean on the linear scale.
LaplaceTable empirical_phi(const std::vector<double>& samples,
                           const std::vector<double>& t_grid);

struct IterateParams {
  double tol = 1e-8;            // sup-norm change on phi
  std::size_t max_iter = 500;
  unsigned quad_order = 64;     // Gauss-Legendre nodes in log w
  double quantile_cut = 1e-8;   // truncated mass per tail, per step
};

// Functional iteration phi_{k+1}(t) = (E phi_k(t W))^2 from phi_0 = e^{-t};
// iterate k equals the Laplace transform of the depth-k variable up to
// quadrature and interpolation error. Non-convergence is reported in the
// returned metadata, never silently dropped.
LaplaceTable iterate_phi(const GeneratorSpec& spec, const LogGrid& grid,
                         const IterateParams& params = {});

// sup over grid points of |phi(t) - (E phi(tW))^2| with a fresh quadrature
// rule of the given order; the table's own interpolation supplies off-grid
// values.
double functional_residual(const LaplaceTable& table, const GeneratorSpec& spec,
                           unsigned quad_order);

struct ExponentEstimate {
  LoglogFit fit;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

// Double-log slope of the table over grid points with window_lo <= t <=
// window_hi. Requires >= 5 points and phi < 1/e throughout the window.
ExponentEstimate fit_exponent(const LaplaceTable& table, double window_lo,
                              double window_hi);

}  // namespace casclab
