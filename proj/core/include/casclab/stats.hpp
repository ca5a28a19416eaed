#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace casclab {

// Empirical CDF over a finite sample. Right-continuous:
// F(x) = #{v_i <= x} / n.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> values);

  double operator()(double x) const;     // P(X <= x)
  double survival_geq(double x) const;   // P(X >= x)
  const std::vector<double>& sorted() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

 private:
  std::vector<double> values_;  // ascending
};

// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
double ks_distance(const Ecdf& a, const Ecdf& b);

struct BinomialCi {
  double lower = 0.0;
  double upper = 1.0;
};

// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
// proportion. level is the confidence level, e.g. 0.95.
BinomialCi clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                           double level);

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;            // sqrt(SSE) in fit coordinates
  std::vector<double> local_slopes;      // between consecutive points
  std::size_t points = 0;
};

// OLS fit of log log(1/v) against log log t. Requires >= 5 points,
// t > 1 and v in (0, 1/e) so both double logs are defined.
LoglogFit loglog_fit(const std::vector<double>& t,
                     const std::vector<double>& v);

// Same OLS on already-transformed coordinates (x, y); callers holding
// log-scale data use this to sidestep underflow in the linear domain.
LoglogFit loglog_fit_xy(const std::vector<double>& x,
                        const std::vector<double>& y);

struct DominanceReport {
  bool pass = false;
  double worst_gap = 0.0;  // max over x of P(B >= x) - P(A >= x)
  double at_x = 0.0;
};

// One-sided stochastic dominance check with slack:
// pass iff P(A >= x) >= P(B >= x) - slack at every point of the merged
// support. worst_gap is reported even when negative (A clearly dominates).
DominanceReport dominance_check(const Ecdf& a, const Ecdf& b, double slack);

}  // namespace casclab
