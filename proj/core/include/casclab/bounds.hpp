#pragma once

#include <cstddef>
#include <vector>

#include "casclab/generator.hpp"
#include "casclab/laplace.hpp"
#include "casclab/rng.hpp"

namespace casclab {

// Bootstrap exponent recursion alpha_0 = 1,
// alpha_k = (gamma alpha_{k-1} + gamma) / (gamma + 1), increasing to gamma.
// gamma - alpha_n = (gamma - 1) (gamma/(gamma+1))^n in closed form.
struct BootstrapSequence {
  double gamma = 0.0;
  double tol = 0.0;
  std::vector<double> alpha;  // alpha[0] = 1; last entry within tol of gamma
  std::vector<double> gap;    // gamma - alpha_n, iterated in gap form so the
                              // far terms keep full relative precision
};

BootstrapSequence alpha_sequence(double gamma, double tol);

// Two-term rate profile: k branching levels cost k (log t)^alpha work at the
// current exponent alpha and buy a k^{-gamma} (log t)^gamma tail factor.
double f_t(double k, double c, double c_alpha, double alpha, double gamma,
           double t);

// Closed-form minimizer of f_t over k > 0.
double k0_optimal(double c, double c_alpha, double alpha, double gamma,
                  double t);

// First level where the running weight product drops below t^{-1/2}.
struct TauDistribution {
  std::vector<double> p;           // p[k-1] estimates P(tau = k), k = 1..n_max
  double p_overflow = 0.0;         // mass with tau > n_max
  std::vector<double> domination;  // k * P(W <= t^{-1/(2k)})
  std::size_t count = 0;
};

TauDistribution tau_distribution(const GeneratorSpec& spec, double t, int n_max,
                                 std::size_t count, RngStream& stream);

// Certified lower bound for phi(t), valid once log t >= 2 (-log x'):
//   product form: prod_{k=1..n} P(W <= t^{-2^-k})^{2^k}
//                 * phi(1/x')^{log t / (-log x')}
//   closed form:  exp(-c/(2^{gamma-1}-1) (log t)^gamma
//                 - (log phi(1/x') / log x') log t)
// with n the greatest integer such that t^{-2^-n} <= x'. Both are returned
// as logs; the product dominates the closed form whenever the certificate
// inequality holds at the n probe points, which is re-checked here.
struct CertifiedLowerBound {
  double log_product = 0.0;
  double log_closed = 0.0;
  int n = 0;
  bool cert_holds_at_probes = false;
};

CertifiedLowerBound phi_lower_certified(const TailCertificate& cert,
                                        double phi_at_inv_xprime, double t);

// Laplace bridges for the small-deviation probability P(Y <= x).
double smalldev_upper(const LaplaceTable& table, double x);  // e phi(1/x)
double smalldev_lower(const LaplaceTable& table, double x);  // phi(x^-2)-e^{-1/x}

// Polynomial envelope phi(t) <= q^q e^{-q} t^{-q} E[Y^{-q}].
double molchan_envelope(double neg_moment_q, double q, double t);
double log_molchan_envelope(double neg_moment_q, double q, double t);

struct BoundRow {
  double t = 0.0;
  double log_phi = 0.0;
  bool sandwich_valid = false;  // t above the certificate threshold
  double log_product = 0.0;     // when sandwich_valid
  double log_closed = 0.0;
  double log_envelope = 0.0;    // min over the supplied q set
  bool pass_product_le_phi = false;
  bool pass_product_ge_closed = false;
  bool pass_envelope_ge_phi = false;
};

struct BoundReport {
  TailCertificate cert;
  double phi_input = 0.0;  // conservative phi(1/x') fed to the bound
  std::vector<double> q;
  std::vector<double> neg_moments;
  std::vector<BoundRow> rows;
  bool all_pass = true;
};

// Evaluates the certified sandwich and the envelope across the table grid.
// phi(1/x') is read from the table minus its error bracket, keeping the
// certified bound conservative; throws if the bracket swallows the value.
// q and neg_moments must be aligned; both may be empty to skip the envelope.
BoundReport make_bound_report(const LaplaceTable& table,
                              const TailCertificate& cert,
                              const std::vector<double>& q,
                              const std::vector<double>& neg_moments);

}  // namespace casclab
