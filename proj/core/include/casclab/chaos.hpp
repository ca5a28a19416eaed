#pragma once

#include <cstddef>
#include <vector>

#include "casclab/rng.hpp"

namespace casclab {

// Uniform midpoint grid on [0,1]: x_i = (i + 1/2)/n, cell width 1/n.
struct FieldGrid {
  int n = 0;
  explicit FieldGrid(int n_) : n(n_) {}
  double x(int i) const { return (i + 0.5) / n; }
  double dx() const { return 1.0 / n; }
};

// Stationary covariance of the truncated log-correlated field:
//   E X_eps1(x) X_eps2(y), e = max(eps1, eps2), d = |x - y|
//     d <  e : log(1/e) - (1/e - 1) d
//     e <= d <= 1 : log(1/d) - 1 + d
//     d >  1 : 0
// Both branches meet at d = e; the variance at d = 0 is log(1/e).
double kernel_value(double eps1, double eps2, double x, double y);

// Dense covariance of X_eps on grid points, row-major n x n.
std::vector<double> build_covariance(const FieldGrid& grid, double eps);
// Covariance between arbitrary evaluation points (used by the [0,1/3]
// sub-grid probes and the coupled two-scale sampler).
std::vector<double> build_covariance_points(const std::vector<double>& points,
                                            double eps);

struct CovarianceFactor {
  int n = 0;
  std::vector<double> l;  // row-major lower Cholesky factor
  double jitter = 0.0;    // diagonal shift that was needed, 0 in the clean case
};

// Cholesky factorization with a diagonal jitter ladder capped at
// 1e-10 * C_00. Needing more than the cap is reported as an error, not
// silently absorbed.
CovarianceFactor factorize_covariance(const std::vector<double>& cov, int n,
                                      double c00);

// One field draw L z with z standard normal, n draws in index order.
std::vector<double> sample_field(const CovarianceFactor& factor,
                                 RngStream& stream);

struct ChaosParams {
  double beta = 0.0;  // subcritical |beta| < sqrt(2)
  double eps = 0.0;
};

// Riemann sum of exp(beta X - beta^2/2 log(1/eps)) dx over the grid.
// Each summand has mean exactly one, so E mass = 1 at every (beta, eps, n).
double chaos_mass(const std::vector<double>& field, const ChaosParams& params,
                  const FieldGrid& grid);

// White-noise route: X_eps(x) = W(T_eps(x)) for the truncated triangle
//   T_eps(x) = { (x', y') : max(2|x - x'|, eps) <= y' <= 1 }
// under the control measure dx' dy'/y'^2. Cells partition the strip
// [min x - 1/2, max x + 1/2] x [eps, 1]; a cell belongs to a triangle when
// its center does.
struct WhiteNoiseModel {
  double eps = 0.0;
  std::vector<double> points;
  std::size_t n_cells = 0;
  std::vector<double> sqrt_lambda;          // per cell
  std::vector<std::vector<int>> members;    // per point: owning cell indices
  std::size_t min_cells_per_triangle = 0;
};

// cells_per_unit is the linear cell density; every triangle must cover at
// least 100 cells or construction fails.
WhiteNoiseModel build_whitenoise_model(const std::vector<double>& points,
                                       double eps, int cells_per_unit);
std::vector<double> whitenoise_sample(const WhiteNoiseModel& model,
                                      RngStream& stream);
// Convenience: one draw of the white-noise field on a midpoint grid.
std::vector<double> whitenoise_field(const FieldGrid& grid, double eps,
                                     int cells_per_unit, RngStream& stream);

// Coupled two-scale sampler: X_{1/3} and X_eps_fine on one grid share a
// single joint Gaussian draw, so the coarse-scale weights and the total mass
// come from the same realization. Y_0, Y_1 are fresh independent masses.
struct DecomposeParams {
  double beta = 0.0;
  double eps_fine = 0.0;  // < 1/3
};

struct DecomposeDraw {
  double w0 = 0.0;        // (1/3) inf over [0,1/3] of the coarse weight
  double w1 = 0.0;        // same over [2/3, 1]
  double m_total = 0.0;   // fine-scale mass of [0,1] from the coupled draw
  double recombined = 0.0;  // w0 Y0 + w1 Y1 with fresh Y0, Y1
};

class DecomposeSampler {
 public:
  DecomposeSampler(const DecomposeParams& params, const FieldGrid& grid);
  DecomposeDraw draw(RngStream& stream) const;
  const FieldGrid& grid() const { return grid_; }
  const DecomposeParams& params() const { return params_; }

 private:
  DecomposeParams params_;
  FieldGrid grid_;
  std::vector<int> left_;   // grid indices with x <= 1/3
  std::vector<int> right_;  // grid indices with x >= 2/3
  CovarianceFactor joint_;  // 2n x 2n, fine block first
  CovarianceFactor fine_;   // n x n for the fresh masses
};

// Tail probe for the infimum of X_{1/3} over [0,1/3]: estimates
// P(inf <= -a) on the sub-grid and fits log p against a^2. beta only labels
// the run; the field itself is beta-free.
struct InfTailProbe {
  double beta = 0.0;
  std::vector<double> a;
  std::vector<double> p_hat;
  std::vector<std::size_t> exceedances;
  double slope = 0.0;      // d log p / d a^2, expected negative
  double intercept = 0.0;
  double r_squared = 0.0;
  bool low_counts = false;  // largest a saw fewer than 50 exceedances
  std::size_t replicates = 0;
};

InfTailProbe inf_tail_probe(double beta, double eps,
                            const std::vector<double>& a_grid,
                            std::size_t replicates, const FieldGrid& grid,
                            RngStream& stream);

}  // namespace casclab
