#include "casclab/chaos.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace casclab {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0) || !(eps <= 1.0))
    throw std::invalid_argument("kernel scale must lie in (0, 1], got " +
                                std::to_string(eps));
}

}  // namespace

double kernel_value(double eps1, double eps2, double x, double y) {
  check_eps(eps1);
  check_eps(eps2);
  const double e = std::max(eps1, eps2);
  const double d = std::abs(x - y);
  if (d < e) return std::log(1.0 / e) - (1.0 / e - 1.0) * d;
  if (d <= 1.0) return std::log(1.0 / d) - 1.0 + d;
  return 0.0;
}

std::vector<double> build_covariance_points(const std::vector<double>& points,
                                            double eps) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("covariance needs at least one point");
  std::vector<double> cov(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_value(eps, eps, points[i], points[j]);
      cov[static_cast<std::size_t>(i) * n + j] = v;
      cov[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return cov;
}

std::vector<double> build_covariance(const FieldGrid& grid, double eps) {
  std::vector<double> points(grid.n);
  for (int i = 0; i < grid.n; ++i) points[i] = grid.x(i);
  return build_covariance_points(points, eps);
}

CovarianceFactor factorize_covariance(const std::vector<double>& cov, int n,
                                      double c00) {
  if (n <= 0 || cov.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("covariance size does not match n");
  if (!(c00 > 0.0))
    throw std::invalid_argument("jitter reference scale must be positive");
  Eigen::Map<const Eigen::MatrixXd> m(cov.data(), n, n);

  // Jitter ladder: clean factorization first, then geometric steps up to the
  // cap. The kernel is positive semi-definite, so anything past 1e-10 C00
  // signals a wrong covariance rather than roundoff.
  const double steps[] = {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10};
  for (double s : steps) {
    Eigen::MatrixXd shifted = m;
    if (s > 0.0)
      shifted.diagonal().array() += s * c00;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      CovarianceFactor factor;
      factor.n = n;
      factor.jitter = s * c00;
      factor.l.resize(static_cast<std::size_t>(n) * n, 0.0);
      Eigen::MatrixXd l = llt.matrixL();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
          factor.l[static_cast<std::size_t>(i) * n + j] = l(i, j);
      return factor;
    }
  }
  throw std::runtime_error(
      "covariance is not positive definite even with jitter 1e-10 * C00; "
      "matrix is likely wrong");
}

std::vector<double> sample_field(const CovarianceFactor& factor,
                                 RngStream& stream) {
  const int n = factor.n;
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = stream.normal();
  std::vector<double> field(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = factor.l.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j <= i; ++j) acc += row[j] * z[j];
    field[i] = acc;
  }
  return field;
}

double chaos_mass(const std::vector<double>& field, const ChaosParams& params,
                  const FieldGrid& grid) {
  if (field.size() != static_cast<std::size_t>(grid.n))
    throw std::invalid_argument("field length does not match grid");
  check_eps(params.eps);
  const double shift = 0.5 * params.beta * params.beta * std::log(1.0 / params.eps);
  double mass = 0.0;
  for (double x : field) mass += std::exp(params.beta * x - shift);
  return mass * grid.dx();
}

WhiteNoiseModel build_whitenoise_model(const std::vector<double>& points,
                                       double eps, int cells_per_unit) {
  if (points.empty())
    throw std::invalid_argument("white-noise model needs evaluation points");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("white-noise model needs eps in (0, 1)");
  if (cells_per_unit < 2)
    throw std::invalid_argument("cells_per_unit must be at least 2");

  const auto [pmin, pmax] = std::minmax_element(points.begin(), points.end());
  // Triangles reach at most 1/2 to either side of an apex (where 2|x-x'| = 1).
  const double x_lo = *pmin - 0.5;
  const double x_hi = *pmax + 0.5;
  const int nx = static_cast<int>(std::ceil((x_hi - x_lo) * cells_per_unit));
  const double dx = (x_hi - x_lo) / nx;
  const int ny =
      std::max(1, static_cast<int>(std::lround((1.0 - eps) * cells_per_unit)));
  const double dy = (1.0 - eps) / ny;  // cells tile [eps, 1] exactly

  WhiteNoiseModel model;
  model.eps = eps;
  model.points = points;
  model.n_cells = static_cast<std::size_t>(nx) * ny;
  model.sqrt_lambda.resize(model.n_cells);
  model.members.assign(points.size(), {});

  for (int iy = 0; iy < ny; ++iy) {
    const double y_lo = eps + iy * dy;
    const double y_hi = y_lo + dy;
    const double yc = y_lo + 0.5 * dy;
    const double lambda_col = 1.0 / y_lo - 1.0 / y_hi;  // integral of dy/y^2
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iy) * nx + ix;
      model.sqrt_lambda[k] = std::sqrt(dx * lambda_col);
      const double xc = x_lo + (ix + 0.5) * dx;
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (std::max(2.0 * std::abs(points[p] - xc), eps) <= yc)
          model.members[p].push_back(static_cast<int>(k));
      }
    }
  }

  std::size_t min_cells = model.n_cells;
  for (const auto& m : model.members) min_cells = std::min(min_cells, m.size());
  model.min_cells_per_triangle = min_cells;
  if (min_cells < 100)
    throw std::invalid_argument(
        "white-noise resolution too coarse: a triangle covers only " +
        std::to_string(min_cells) +
        " cells (< 100); raise cells_per_unit");
  return model;
}

std::vector<double> whitenoise_sample(const WhiteNoiseModel& model,
                                      RngStream& stream) {
  // All cells consume a draw in index order, so the sample is a function of
  // the stream position alone, not of the evaluation points.
  std::vector<double> z(model.n_cells);
  for (auto& v : z) v = stream.normal();
  std::vector<double> field(model.points.size(), 0.0);
  for (std::size_t p = 0; p < model.points.size(); ++p) {
    double acc = 0.0;
    for (int k : model.members[p]) acc += model.sqrt_lambda[k] * z[k];
    field[p] = acc;
  }
  return field;
}

std::vector<double> whitenoise_field(const FieldGrid& grid, double eps,
                                     int cells_per_unit, RngStream& stream) {
  std::vector<double> points(grid.n);
  for (int i = 0; i < grid.n; ++i) points[i] = grid.x(i);
  const auto model = build_whitenoise_model(points, eps, cells_per_unit);
  return whitenoise_sample(model, stream);
}

DecomposeSampler::DecomposeSampler(const DecomposeParams& params,
                                   const FieldGrid& grid)
    : params_(params), grid_(grid) {
  if (!(params.eps_fine > 0.0) || !(params.eps_fine < 1.0 / 3.0))
    throw std::invalid_argument("decomposition needs eps_fine in (0, 1/3)");
  if (grid.n < 9)
    throw std::invalid_argument("decomposition grid too small");
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (x <= 1.0 / 3.0) left_.push_back(i);
    if (x >= 2.0 / 3.0) right_.push_back(i);
  }
  if (left_.empty() || right_.empty())
    throw std::invalid_argument("decomposition grid misses an end interval");

  const int n = grid.n;
  const double ef = params.eps_fine;
  const double ec = 1.0 / 3.0;
  // Joint covariance of (X_ef, X_1/3) on the shared grid; the cross block
  // uses the coarser of the two truncation scales.
  std::vector<double> joint(static_cast<std::size_t>(2 * n) * (2 * n));
  const auto at = [&](int i, int j) -> double& {
    return joint[static_cast<std::size_t>(i) * 2 * n + j];
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = grid.x(i), xj = grid.x(j);
      at(i, j) = kernel_value(ef, ef, xi, xj);
      at(n + i, n + j) = kernel_value(ec, ec, xi, xj);
      const double cross = kernel_value(ef, ec, xi, xj);
      at(i, n + j) = cross;
      at(n + i, j) = cross;
    }
  }
  joint_ = factorize_covariance(joint, 2 * n, std::log(1.0 / ef));
  fine_ = factorize_covariance(build_covariance(grid, ef), n,
                               std::log(1.0 / ef));
}

DecomposeDraw DecomposeSampler::draw(RngStream& stream) const {
  const int n = grid_.n;
  const double beta = params_.beta;
  const auto joint_field = sample_field(joint_, stream);

  const std::vector<double> fine(joint_field.begin(), joint_field.begin() + n);
  DecomposeDraw out;
  out.m_total = chaos_mass(fine, {beta, params_.eps_fine}, grid_);

  const double log3 = std::log(3.0);
  double min_l = joint_field[static_cast<std::size_t>(n) + left_.front()];
  for (int i : left_)
    min_l = std::min(min_l, joint_field[static_cast<std::size_t>(n) + i]);
  double min_r = joint_field[static_cast<std::size_t>(n) + right_.front()];
  for (int i : right_)
    min_r = std::min(min_r, joint_field[static_cast<std::size_t>(n) + i]);
  out.w0 = (1.0 / 3.0) * std::exp(beta * min_l - 0.5 * beta * beta * log3);
  out.w1 = (1.0 / 3.0) * std::exp(beta * min_r - 0.5 * beta * beta * log3);

  // Fresh masses, independent of the joint draw: Y0 first, then Y1.
  const double y0 =
      chaos_mass(sample_field(fine_, stream), {beta, params_.eps_fine}, grid_);
  const double y1 =
      chaos_mass(sample_field(fine_, stream), {beta, params_.eps_fine}, grid_);
  out.recombined = out.w0 * y0 + out.w1 * y1;
  return out;
}

InfTailProbe inf_tail_probe(double beta, double eps,
                            const std::vector<double>& a_grid,
                            std::size_t replicates, const FieldGrid& grid,
                            RngStream& stream) {
  if (a_grid.empty())
    throw std::invalid_argument("tail probe needs threshold levels");
  if (!(a_grid.front() >= 0.0))
    throw std::invalid_argument("thresholds must be nonnegative");
  for (std::size_t k = 1; k < a_grid.size(); ++k)
    if (!(a_grid[k] > a_grid[k - 1]))
      throw std::invalid_argument("thresholds must be strictly increasing");
  if (replicates == 0)
    throw std::invalid_argument("tail probe needs replicates");

  std::vector<double> points;
  for (int i = 0; i < grid.n; ++i)
    if (grid.x(i) <= 1.0 / 3.0) points.push_back(grid.x(i));
  const auto factor =
      factorize_covariance(build_covariance_points(points, eps),
                           static_cast<int>(points.size()),
                           std::log(1.0 / eps));

  InfTailProbe probe;
  probe.beta = beta;
  probe.a = a_grid;
  probe.replicates = replicates;
  probe.exceedances.assign(a_grid.size(), 0);
  for (std::size_t r = 0; r < replicates; ++r) {
    const auto field = sample_field(factor, stream);
    const double m = *std::min_element(field.begin(), field.end());
    for (std::size_t k = 0; k < a_grid.size(); ++k)
      if (m <= -a_grid[k]) ++probe.exceedances[k];
  }
  probe.p_hat.resize(a_grid.size());
  for (std::size_t k = 0; k < a_grid.size(); ++k)
    probe.p_hat[k] = static_cast<double>(probe.exceedances[k]) / replicates;
  probe.low_counts = probe.exceedances.back() < 50;

  // OLS of log p against a^2 over levels with at least one hit.
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < a_grid.size(); ++k) {
    if (probe.exceedances[k] == 0) continue;
    xs.push_back(a_grid[k] * a_grid[k]);
    ys.push_back(std::log(probe.p_hat[k]));
  }
  if (xs.size() < 3)
    throw std::runtime_error(
        "tail probe has fewer than 3 levels with hits; lower the thresholds "
        "or raise replicates");
  const std::size_t m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0)
    throw std::runtime_error("tail probe thresholds are degenerate");
  probe.slope = (m * sxy - sx * sy) / denom;
  probe.intercept = (sy - probe.slope * sx) / m;
  double sse = 0.0, sst = 0.0;
  const double ybar = sy / m;
  for (std::size_t k = 0; k < m; ++k) {
    const double fit = probe.intercept + probe.slope * xs[k];
    sse += (ys[k] - fit) * (ys[k] - fit);
    sst += (ys[k] - ybar) * (ys[k] - ybar);
  }
  probe.r_squared = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  return probe;
}

}  // namespace casclab
