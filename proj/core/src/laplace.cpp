#include "casclab/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace casclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this argument every iterate is pinned between e^{-s} and 1, so the
// weight tail with t w <= kClosureArg can be closed out exactly instead of
// quadratured. That closure is what keeps log phi honest at large t: the
// integrand's mass migrates far into the left weight tail as t grows, and a
// fixed quantile window would silently drop it.
constexpr double kClosureArg = 1e-6;

// Quadrature for log E phi(t W) at one fixed t. Composite Gauss panels over
// log w in [log(kClosureArg / t), q(1 - cut)], a closure term for the weight
// tail below the panels, and the top cut mass discarded. Every neglected
// piece errs downward, so iterates stay pointwise lower bounds for the exact
// map. Node arguments t e^v never change across iterations, so the grid
// lookup is resolved once: idx >= 0 interpolates the table, -1 is the
// below-grid e^{-s} closure, -2 reads the live table's top extrapolation.
//
// Panels never straddle an interpolation knot. The table is piecewise linear
// in log s, and a Gauss panel across a knot degrades to low-order accuracy;
// the doubled-order residual diagnostic would then measure quadrature noise
// on the kinks instead of convergence. Where the integrand is smooth (below
// the grid, above it, and inside one cell) Gauss converges spectrally, so a
// handful of nodes per cell suffices.
struct TRule {
  double closure_log = -kInf;  // log( P(closure region) * min phi there )
  std::vector<double> log_w;
  std::vector<double> s;
  std::vector<std::ptrdiff_t> idx;
  std::vector<double> lam;
};

template <unsigned Order>
void fill_panel(const GeneratorSpec& spec, double t, double lo, double hi,
                TRule& rule) {
  using G = boost::math::quadrature::gauss<double, Order>;
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const double log_half = std::log(half);
  for (unsigned i = 0; i < G::abscissa().size(); ++i) {
    const double a = G::abscissa()[i];
    const double gw = G::weights()[i];
    // boost stores only the non-negative abscissae; mirror them.
    for (int sgn : {1, -1}) {
      if (a == 0.0 && sgn < 0) continue;
      const double v = mid + sgn * a * half;
      rule.log_w.push_back(std::log(gw) + log_half +
                           log_weight_log_pdf(spec, v));
      rule.s.push_back(t * std::exp(v));
    }
  }
}

void check_order(unsigned order) {
  switch (order) {
    case 16: case 32: case 64: case 128: case 256: return;
    default:
      throw std::invalid_argument(
          "laplace: quadrature order must be one of 16, 32, 64, 128, 256");
  }
}

TRule make_t_rule(const GeneratorSpec& spec, const std::vector<double>& grid,
                  double t, unsigned order, double quantile_cut) {
  TRule rule;
  if (spec.family == WeightFamily::deterministic_half) {
    rule.log_w = {0.0};
    rule.s = {0.5 * t};
  } else {
    const double v_hi = log_weight_quantile(spec, 1.0 - quantile_cut);
    const double v_lo = std::min(std::log(kClosureArg / t), v_hi - 1e-9);
    rule.closure_log = log_weight_cdf(spec, std::exp(v_lo)) - kClosureArg;
    // Off-grid panel width scales with the order so node density stays
    // fixed; the integrand varies on the sigma scale of log W there.
    const double width = static_cast<double>(order) / 32.0;
    const unsigned cell_nodes = std::max(2u, order / 16u);
    const auto add_smooth = [&](double lo, double hi) {
      if (!(hi > lo)) return;
      const std::size_t panels = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
      const double h = (hi - lo) / static_cast<double>(panels);
      for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + h * static_cast<double>(p);
        const double b = p + 1 == panels ? hi : a + h;
        switch (order) {
          case 16: fill_panel<16>(spec, t, a, b, rule); break;
          case 32: fill_panel<32>(spec, t, a, b, rule); break;
          case 64: fill_panel<64>(spec, t, a, b, rule); break;
          case 128: fill_panel<128>(spec, t, a, b, rule); break;
          case 256: fill_panel<256>(spec, t, a, b, rule); break;
        }
      }
    };
    const auto add_cell = [&](double lo, double hi) {
      if (!(hi > lo)) return;
      switch (cell_nodes) {
        case 2: fill_panel<2>(spec, t, lo, hi, rule); break;
        case 4: fill_panel<4>(spec, t, lo, hi, rule); break;
        case 8: fill_panel<8>(spec, t, lo, hi, rule); break;
        default: fill_panel<16>(spec, t, lo, hi, rule); break;
      }
    };
    const double v_front = std::log(grid.front() / t);
    const double v_back = std::log(grid.back() / t);
    add_smooth(v_lo, std::min(v_front, v_hi));
    if (v_hi > v_front && v_lo < v_back) {
      const double a = std::max(v_lo, v_front);
      const double b = std::min(v_hi, v_back);
      const double s_a = t * std::exp(a);
      std::size_t k = static_cast<std::size_t>(
          std::upper_bound(grid.begin(), grid.end(), s_a) - grid.begin());
      if (k > 0) --k;
      for (; k + 1 < grid.size(); ++k) {
        const double c_lo = std::max(a, std::log(grid[k] / t));
        if (c_lo >= b) break;
        add_cell(c_lo, std::min(b, std::log(grid[k + 1] / t)));
      }
    }
    add_smooth(std::max(v_back, v_lo), v_hi);
    // Nodes more than 760 nats below the densest one can never surface
    // through the log-sum-exp; drop them.
    double peak = -kInf;
    for (double lw : rule.log_w) peak = std::max(peak, lw);
    std::size_t keep = 0;
    for (std::size_t i = 0; i < rule.log_w.size(); ++i) {
      if (rule.log_w[i] < peak - 760.0) continue;
      rule.log_w[keep] = rule.log_w[i];
      rule.s[keep] = rule.s[i];
      ++keep;
    }
    rule.log_w.resize(keep);
    rule.s.resize(keep);
  }
  rule.idx.resize(rule.s.size());
  rule.lam.resize(rule.s.size(), 0.0);
  for (std::size_t i = 0; i < rule.s.size(); ++i) {
    const double s = rule.s[i];
    if (s < grid.front()) {
      rule.idx[i] = -1;
    } else if (s <= grid.back()) {
      const auto it = std::upper_bound(grid.begin(), grid.end(), s);
      const std::size_t hi =
          std::min<std::size_t>(it - grid.begin(), grid.size() - 1);
      const std::size_t lo = hi - 1;
      rule.idx[i] = static_cast<std::ptrdiff_t>(lo);
      rule.lam[i] = s == grid[lo]
                        ? 0.0
                        : (std::log(s) - std::log(grid[lo])) /
                              (std::log(grid[hi]) - std::log(grid[lo]));
    } else {
      rule.idx[i] = -2;
    }
  }
  return rule;
}

std::vector<TRule> make_rules(const GeneratorSpec& spec,
                              const std::vector<double>& grid, unsigned order,
                              double quantile_cut) {
  check_order(order);
  std::vector<TRule> rules;
  rules.reserve(grid.size());
  for (double t : grid) {
    rules.push_back(make_t_rule(spec, grid, t, order, quantile_cut));
  }
  return rules;
}

// log of E phi(t W) via log-sum-exp over the rule nodes plus the closure.
double log_mean_phi(const LaplaceTable& table, const TRule& rule) {
  const std::vector<double>& lp = table.log_phi;
  double m = rule.closure_log;
  thread_local std::vector<double> terms;
  terms.clear();
  for (std::size_t i = 0; i < rule.s.size(); ++i) {
    const std::ptrdiff_t ix = rule.idx[i];
    double lphi;
    if (ix >= 0) {
      lphi = lp[ix] + rule.lam[i] * (lp[ix + 1] - lp[ix]);
    } else if (ix == -1) {
      lphi = -rule.s[i];
    } else {
      lphi = log_phi_at(table, rule.s[i]);
    }
    const double term = rule.log_w[i] + lphi;
    terms.push_back(term);
    if (term > m) m = term;
  }
  if (m == -kInf) return -kInf;
  double acc = rule.closure_log == -kInf ? 0.0 : std::exp(rule.closure_log - m);
  for (double term : terms) acc += std::exp(term - m);
  return m + std::log(acc);
}

void validate_grid_vector(const std::vector<double>& t) {
  if (t.size() < 2) throw std::invalid_argument("laplace: grid too small");
  if (!(t.front() > 0.0)) throw std::invalid_argument("laplace: grid must be positive");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1]))
      throw std::invalid_argument("laplace: grid must be strictly increasing");
  }
}

}  // namespace

double LaplaceTable::phi(std::size_t i) const { return std::exp(log_phi[i]); }

LogGrid make_log_grid(double t_min, double t_max, std::size_t points_request) {
  if (!(t_min > 0.0 && t_max > t_min))
    throw std::invalid_argument("make_log_grid: need 0 < t_min < t_max");
  if (points_request < 2)
    throw std::invalid_argument("make_log_grid: need at least 2 points");
  const double octaves = std::log2(t_max / t_min);
  std::size_t per_octave = static_cast<std::size_t>(
      std::lround(static_cast<double>(points_request - 1) / octaves));
  per_octave = std::max<std::size_t>(1, per_octave);
  const std::size_t whole_octaves =
      static_cast<std::size_t>(std::ceil(octaves - 1e-12));
  LogGrid grid;
  grid.per_octave = per_octave;
  std::vector<double> base(per_octave);
  for (std::size_t j = 0; j < per_octave; ++j) {
    base[j] = std::exp2(static_cast<double>(j) / static_cast<double>(per_octave));
  }
  grid.t.reserve(whole_octaves * per_octave + 1);
  for (std::size_t i = 0; i <= whole_octaves * per_octave; ++i) {
    const int oct = static_cast<int>(i / per_octave);
    const std::size_t j = i % per_octave;
    // ldexp by a whole octave is exact, so t[i + per_octave] == 2 t[i].
    grid.t.push_back(std::ldexp(t_min * base[j], oct));
  }
  return grid;
}

double log_phi_at(const LaplaceTable& table, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("log_phi_at: t must be positive");
  const auto& ts = table.t;
  if (t < ts.front()) return -t;  // e^{-t} closure below the grid
  if (t <= ts.back()) {
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t hi = std::min<std::size_t>(it - ts.begin(), ts.size() - 1);
    const std::size_t lo = hi - 1;
    if (t == ts[lo]) return table.log_phi[lo];
    const double lt = std::log(t);
    const double l0 = std::log(ts[lo]);
    const double l1 = std::log(ts[hi]);
    const double lam = (lt - l0) / (l1 - l0);
    return table.log_phi[lo] +
           lam * (table.log_phi[hi] - table.log_phi[lo]);
  }
  // Beyond the grid: straight line in (log log t, log log 1/phi), slope from
  // the top octave, clamped to [1, gamma_hint].
  const double span = std::log(ts.back() / ts.front());
  if (std::log(t / ts.back()) > 0.5 * span) {
    throw std::runtime_error(
        "log_phi_at: t exceeds the extrapolation limit; widen the grid");
  }
  const double lp_top = table.log_phi.back();
  if (!(lp_top < -1.0) || !(ts.back() > std::exp(1.0))) {
    throw std::runtime_error(
        "log_phi_at: grid too narrow to extrapolate (phi(t_max) >= 1/e)");
  }
  std::size_t ref = table.per_octave > 0
                        ? table.t.size() - 1 - table.per_octave
                        : table.t.size() - 2;
  if (!(table.log_phi[ref] < -1.0)) ref = table.t.size() - 2;
  double slope = 1.0;
  if (table.log_phi[ref] < -1.0) {
    slope = (std::log(-lp_top) - std::log(-table.log_phi[ref])) /
            (std::log(std::log(ts.back())) - std::log(std::log(ts[ref])));
  }
  slope = std::clamp(slope, 1.0, table.gamma_hint);
  const double y =
      std::log(-lp_top) + slope * (std::log(std::log(t)) - std::log(std::log(ts.back())));
  return -std::exp(y);
}

double phi_at(const LaplaceTable& table, double t) {
  return std::exp(log_phi_at(table, t));
}

LaplaceTable empirical_phi(const std::vector<double>& samples,
                           const std::vector<double>& t_grid) {
  validate_grid_vector(t_grid);
  if (samples.empty()) throw std::invalid_argument("empirical_phi: no samples");
  double y_min = kInf;
  for (double y : samples) {
    if (!(y > 0.0) || !std::isfinite(y))
      throw std::invalid_argument("empirical_phi: samples must be positive finite");
    y_min = std::min(y_min, y);
  }
  LaplaceTable table;
  table.method = LaplaceMethod::empirical;
  table.t = t_grid;
  table.sample_count = samples.size();
  const double n = static_cast<double>(samples.size());
  table.log_phi.resize(t_grid.size());
  table.std_error.resize(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    double s1 = 0.0, s2 = 0.0;
    for (double y : samples) {
      const double e = std::exp(-t * (y - y_min));
      s1 += e;
      s2 += e * e;
    }
    table.log_phi[k] = -t * y_min + std::log(s1 / n);
    const double mean_shifted = s1 / n;
    const double var_shifted =
        n > 1 ? std::max(0.0, (s2 / n - mean_shifted * mean_shifted) * n / (n - 1))
              : 0.0;
    table.std_error[k] = std::exp(-t * y_min) * std::sqrt(var_shifted / n);
    if (k > 0) table.log_phi[k] = std::min(table.log_phi[k], table.log_phi[k - 1]);
    table.log_phi[k] = std::min(table.log_phi[k], 0.0);
  }
  return table;
}

LaplaceTable iterate_phi(const GeneratorSpec& spec, const LogGrid& grid,
                         const IterateParams& params) {
  validate_grid_vector(grid.t);
  if (!(grid.t.front() <= 1e-2 && grid.t.back() >= 1e8)) {
    throw std::invalid_argument(
        "iterate_phi: grid must span at least [1e-2, 1e8]");
  }
  if (!(params.tol > 0.0)) throw std::invalid_argument("iterate_phi: tol");
  const std::vector<TRule> rules =
      make_rules(spec, grid.t, params.quad_order, params.quantile_cut);

  LaplaceTable table;
  table.method = LaplaceMethod::iterated;
  table.t = grid.t;
  table.per_octave = grid.per_octave;
  table.tol = params.tol;
  table.quad_order = params.quad_order;
  table.tail_mass_per_step =
      spec.family == WeightFamily::deterministic_half ? 0.0
                                                      : params.quantile_cut;
  table.gamma_hint = log_tail_exponent(spec).value_or(2.0);
  table.log_phi.resize(grid.t.size());
  for (std::size_t i = 0; i < grid.t.size(); ++i) table.log_phi[i] = -grid.t[i];

  std::vector<double> next(grid.t.size());
  double sup_change = kInf;
  std::size_t iter = 0;
  while (iter < params.max_iter) {
    ++iter;
    for (std::size_t i = 0; i < grid.t.size(); ++i) {
      next[i] = 2.0 * log_mean_phi(table, rules[i]);
    }
    // Clamp the ulp-level wiggle; the operator itself is monotone.
    next[0] = std::min(next[0], 0.0);
    for (std::size_t i = 1; i < next.size(); ++i) {
      next[i] = std::min({next[i], next[i - 1], 0.0});
    }
    sup_change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      sup_change = std::max(
          sup_change, std::abs(std::exp(next[i]) - std::exp(table.log_phi[i])));
    }
    table.log_phi = next;
    if (sup_change < params.tol) break;
  }
  table.iterations = iter;
  table.final_sup_change = sup_change;
  table.converged = sup_change < params.tol;
  table.error_bracket = 10.0 * (table.tail_mass_per_step + params.tol);
  return table;
}

double functional_residual(const LaplaceTable& table, const GeneratorSpec& spec,
                           unsigned quad_order) {
  const std::vector<TRule> rules = make_rules(spec, table.t, quad_order, 1e-8);
  double worst = 0.0;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    const double lhs = std::exp(table.log_phi[i]);
    const double rhs = std::exp(2.0 * log_mean_phi(table, rules[i]));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

ExponentEstimate fit_exponent(const LaplaceTable& table, double window_lo,
                              double window_hi) {
  if (!(window_lo > 1.0 && window_hi > window_lo))
    throw std::invalid_argument("fit_exponent: need 1 < window_lo < window_hi");
  // Fit ordinates come from log_phi directly so a far-tail window works even
  // where phi itself underflows.
  std::vector<double> x, y;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    if (table.t[i] < window_lo || table.t[i] > window_hi) continue;
    if (!(table.log_phi[i] < -1.0)) {
      throw std::invalid_argument(
          "fit_exponent: phi >= 1/e inside the window; move the window to "
          "larger t");
    }
    x.push_back(std::log(std::log(table.t[i])));
    y.push_back(std::log(-table.log_phi[i]));
  }
  if (x.size() < 5)
    throw std::invalid_argument("fit_exponent: fewer than 5 grid points in window");
  ExponentEstimate est;
  est.window_lo = window_lo;
  est.window_hi = window_hi;
  est.fit = loglog_fit_xy(x, y);
  return est;
}

}  // namespace casclab
