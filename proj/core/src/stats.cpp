#include "casclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace casclab {

Ecdf::Ecdf(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("Ecdf: empty sample");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("Ecdf: non-finite value");
  }
  std::sort(values_.begin(), values_.end());
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / values_.size();
}

double Ecdf::survival_geq(double x) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(values_.end() - it) / values_.size();
}

double ks_distance(const Ecdf& a, const Ecdf& b) {
  const auto& va = a.sorted();
  const auto& vb = b.sorted();
  const double na = static_cast<double>(va.size());
  const double nb = static_cast<double>(vb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < va.size() || j < vb.size()) {
    double x;
    if (j >= vb.size() || (i < va.size() && va[i] <= vb[j])) {
      x = va[i];
    } else {
      x = vb[j];
    }
    while (i < va.size() && va[i] <= x) ++i;
    while (j < vb.size() && vb[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

BinomialCi clopper_pearson(std::uint64_t successes, std::uint64_t trials,
                           double level) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson: zero trials");
  if (successes > trials)
    throw std::invalid_argument("clopper_pearson: successes > trials");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("clopper_pearson: level must be in (0,1)");
  const double alpha = 1.0 - level;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  BinomialCi ci;
  ci.lower = (successes == 0)
                 ? 0.0
                 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  ci.upper = (successes == trials)
                 ? 1.0
                 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return ci;
}

LoglogFit loglog_fit(const std::vector<double>& t,
                     const std::vector<double>& v) {
  if (t.size() != v.size())
    throw std::invalid_argument("loglog_fit: length mismatch");
  std::vector<double> x(t.size()), y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 1.0))
      throw std::invalid_argument("loglog_fit: t must exceed 1");
    if (!(v[i] > 0.0 && v[i] < std::exp(-1.0)))
      throw std::invalid_argument("loglog_fit: values must lie in (0, 1/e)");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw std::invalid_argument("loglog_fit: t must be strictly increasing");
    x[i] = std::log(std::log(t[i]));
    y[i] = std::log(-std::log(v[i]));
  }
  return loglog_fit_xy(x, y);
}

LoglogFit loglog_fit_xy(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("loglog_fit: length mismatch");
  if (x.size() < 5)
    throw std::invalid_argument("loglog_fit: need at least 5 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0)
    throw std::invalid_argument("loglog_fit: degenerate abscissae");
  LoglogFit fit;
  fit.points = x.size();
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.residual_norm = std::sqrt(sse);
  fit.local_slopes.reserve(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    fit.local_slopes.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));
  }
  return fit;
}

DominanceReport dominance_check(const Ecdf& a, const Ecdf& b, double slack) {
  if (slack < 0.0) throw std::invalid_argument("dominance_check: negative slack");
  DominanceReport rep;
  rep.worst_gap = -1.0;
  auto probe = [&](double x) {
    const double gap = b.survival_geq(x) - a.survival_geq(x);
    if (gap > rep.worst_gap) {
      rep.worst_gap = gap;
      rep.at_x = x;
    }
  };
  for (double x : a.sorted()) probe(x);
  for (double x : b.sorted()) probe(x);
  rep.pass = rep.worst_gap <= slack;
  return rep;
}

}  // namespace casclab
