#include "casclab/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace casclab {

BootstrapSequence alpha_sequence(double gamma, double tol) {
  if (!(gamma > 1.0))
    throw std::invalid_argument("alpha_sequence: gamma must exceed 1");
  if (!(tol > 0.0))
    throw std::invalid_argument("alpha_sequence: tol must be positive");
  BootstrapSequence seq;
  seq.gamma = gamma;
  seq.tol = tol;
  // The update alpha_{k+1} = (gamma alpha_k + gamma)/(gamma+1) is, in exact
  // arithmetic, gap_{k+1} = gap_k * gamma/(gamma+1) for gap_k = gamma -
  // alpha_k. Iterating the gap keeps full relative precision once alpha is
  // within a few ulps of gamma, where the alpha form loses the tail to
  // cancellation.
  const double ratio = gamma / (gamma + 1.0);
  seq.gap.push_back(gamma - 1.0);
  seq.alpha.push_back(1.0);
  const std::size_t hard_cap = 100000;
  while (seq.gap.back() >= tol) {
    seq.gap.push_back(seq.gap.back() * ratio);
    seq.alpha.push_back(gamma - seq.gap.back());
    if (seq.alpha.size() > hard_cap)
      throw std::runtime_error("alpha_sequence: failed to reach tol");
  }
  return seq;
}

double f_t(double k, double c, double c_alpha, double alpha, double gamma,
           double t) {
  if (!(k > 0.0)) throw std::invalid_argument("f_t: k must be positive");
  if (!(t > 1.0)) throw std::invalid_argument("f_t: t must exceed 1");
  const double lt = std::log(t);
  return c_alpha / std::exp2(alpha) * k * std::pow(lt, alpha) +
         c / std::exp2(gamma) * std::pow(k, -gamma) * std::pow(lt, gamma);
}

double k0_optimal(double c, double c_alpha, double alpha, double gamma,
                  double t) {
  if (!(t > 1.0)) throw std::invalid_argument("k0_optimal: t must exceed 1");
  const double lt = std::log(t);
  return std::pow(c * gamma * std::exp2(alpha - gamma) / c_alpha,
                  1.0 / (gamma + 1.0)) *
         std::pow(lt, (gamma - alpha) / (gamma + 1.0));
}

TauDistribution tau_distribution(const GeneratorSpec& spec, double t, int n_max,
                                 std::size_t count, RngStream& stream) {
  if (!(t > 1.0)) throw std::invalid_argument("tau_distribution: t must exceed 1");
  if (n_max < 1) throw std::invalid_argument("tau_distribution: n_max < 1");
  if (count == 0) throw std::invalid_argument("tau_distribution: empty run");
  const double threshold = std::exp(-0.5 * std::log(t));
  TauDistribution dist;
  dist.count = count;
  dist.p.assign(static_cast<std::size_t>(n_max), 0.0);
  std::size_t overflow = 0;
  std::vector<std::size_t> hits(static_cast<std::size_t>(n_max), 0);
  for (std::size_t r = 0; r < count; ++r) {
    double product = 1.0;
    int k = 0;
    for (;;) {
      ++k;
      product *= sample_weight(spec, stream);
      if (product <= threshold) break;
      if (k >= n_max) {
        k = -1;
        break;
      }
    }
    if (k < 0) {
      ++overflow;
    } else {
      ++hits[static_cast<std::size_t>(k - 1)];
    }
  }
  for (int k = 1; k <= n_max; ++k) {
    dist.p[k - 1] =
        static_cast<double>(hits[k - 1]) / static_cast<double>(count);
  }
  dist.p_overflow = static_cast<double>(overflow) / static_cast<double>(count);
  dist.domination.reserve(static_cast<std::size_t>(n_max));
  for (int k = 1; k <= n_max; ++k) {
    const double x = std::exp(-std::log(t) / (2.0 * k));
    dist.domination.push_back(k * weight_cdf(spec, x));
  }
  return dist;
}

CertifiedLowerBound phi_lower_certified(const TailCertificate& cert,
                                        double phi_at_inv_xprime, double t) {
  if (cert.direction != TailDirection::cdf_lower)
    throw std::invalid_argument("phi_lower_certified: need a cdf-lower certificate");
  if (!(phi_at_inv_xprime > 0.0 && phi_at_inv_xprime < 1.0))
    throw std::invalid_argument("phi_lower_certified: phi(1/x') must be in (0,1)");
  const double lt = std::log(t);
  const double lx = -std::log(cert.x_prime);  // > 0
  if (!(lx > 0.0))
    throw std::invalid_argument("phi_lower_certified: certificate needs x' < 1");
  if (!(lt >= 2.0 * lx)) {
    throw std::invalid_argument(
        "phi_lower_certified: t below validity threshold (1/x')^2");
  }
  CertifiedLowerBound out;
  out.n = static_cast<int>(std::floor(std::log2(lt / lx)));
  const double log_phi = std::log(phi_at_inv_xprime);
  const double exponent_ratio = lt / lx;

  double log_prod_cdf = 0.0;
  out.cert_holds_at_probes = true;
  for (int k = 1; k <= out.n; ++k) {
    const double xk = std::exp(-lt * std::exp2(-k));  // t^{-2^-k} <= x'
    const double lcdf = log_weight_cdf(cert.spec, xk);
    log_prod_cdf += std::exp2(k) * lcdf;
    if (!(-cert.c * std::pow(lt * std::exp2(-k), cert.gamma) <= lcdf)) {
      out.cert_holds_at_probes = false;
    }
  }
  out.log_product = log_prod_cdf + exponent_ratio * log_phi;
  out.log_closed =
      -cert.c / (std::exp2(cert.gamma - 1.0) - 1.0) * std::pow(lt, cert.gamma) +
      exponent_ratio * log_phi;
  return out;
}

double smalldev_upper(const LaplaceTable& table, double x) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("smalldev_upper: x must be in (0,1)");
  return std::exp(1.0 + log_phi_at(table, 1.0 / x));
}

double smalldev_lower(const LaplaceTable& table, double x) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("smalldev_lower: x must be in (0,1)");
  const double lead = std::exp(log_phi_at(table, 1.0 / (x * x)));
  return std::max(0.0, lead - std::exp(-1.0 / x));
}

double log_molchan_envelope(double neg_moment_q, double q, double t) {
  if (!(q > 0.0)) throw std::invalid_argument("molchan_envelope: q <= 0");
  if (!(neg_moment_q > 0.0))
    throw std::invalid_argument("molchan_envelope: E Y^-q must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("molchan_envelope: t <= 0");
  return q * std::log(q) - q - q * std::log(t) + std::log(neg_moment_q);
}

double molchan_envelope(double neg_moment_q, double q, double t) {
  return std::exp(log_molchan_envelope(neg_moment_q, q, t));
}

BoundReport make_bound_report(const LaplaceTable& table,
                              const TailCertificate& cert,
                              const std::vector<double>& q,
                              const std::vector<double>& neg_moments) {
  if (q.size() != neg_moments.size())
    throw std::invalid_argument("make_bound_report: q / neg_moments mismatch");
  BoundReport report;
  report.cert = cert;
  report.q = q;
  report.neg_moments = neg_moments;

  const double phi_raw = phi_at(table, 1.0 / cert.x_prime);
  report.phi_input = phi_raw - table.error_bracket;
  if (!(report.phi_input > 0.0)) {
    throw std::runtime_error(
        "make_bound_report: error bracket swallows phi(1/x'); use a larger "
        "x' or a tighter table");
  }
  const double threshold = std::exp(2.0 * (-std::log(cert.x_prime)));

  report.rows.reserve(table.t.size());
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    BoundRow row;
    row.t = table.t[i];
    row.log_phi = table.log_phi[i];
    if (row.t >= threshold && row.t > 1.0) {
      const auto lb = phi_lower_certified(cert, report.phi_input, row.t);
      row.sandwich_valid = true;
      row.log_product = lb.log_product;
      row.log_closed = lb.log_closed;
      row.pass_product_le_phi = lb.log_product <= row.log_phi;
      row.pass_product_ge_closed =
          lb.cert_holds_at_probes && lb.log_product >= lb.log_closed;
    }
    if (!q.empty() && row.t > 0.0) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < q.size(); ++m) {
        best = std::min(best,
                        log_molchan_envelope(neg_moments[m], q[m], row.t));
      }
      row.log_envelope = best;
      row.pass_envelope_ge_phi = best >= row.log_phi;
    } else {
      row.log_envelope = std::numeric_limits<double>::quiet_NaN();
      row.pass_envelope_ge_phi = true;
    }
    if (row.sandwich_valid &&
        (!row.pass_product_le_phi || !row.pass_product_ge_closed)) {
      report.all_pass = false;
    }
    if (!row.pass_envelope_ge_phi) report.all_pass = false;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace casclab
