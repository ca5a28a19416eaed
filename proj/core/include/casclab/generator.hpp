#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "casclab/rng.hpp"

namespace casclab {

// Weight families for the branching recursion. Every family is normalized so
// that E W = 1/2; construction verifies this by quadrature to 1e-10.
enum class WeightFamily { deterministic_half, lognormal, log_weibull };

struct GeneratorSpec {
  WeightFamily family = WeightFamily::deterministic_half;
  double sigma = 0.0;  // lognormal: sd of log W
  double mu = 0.0;     // lognormal: mean of log W, fixed to -log2 - sigma^2/2
  double c = 0.0;      // log-weibull tail constant
  double gamma = 0.0;  // log-weibull tail exponent, > 1
  double scale = 1.0;  // log-weibull: W = scale * exp(-V)
};

GeneratorSpec make_deterministic_half();
GeneratorSpec make_lognormal(double sigma);
GeneratorSpec make_log_weibull(double c, double gamma);

// "deterministic-half" | "lognormal:<sigma>" | "log-weibull:<c>:<gamma>"
GeneratorSpec parse_spec(const std::string& text);
std::string spec_label(const GeneratorSpec& spec);

std::string to_json_string(const GeneratorSpec& spec);
GeneratorSpec spec_from_json_string(const std::string& text);

double sample_weight(const GeneratorSpec& spec, RngStream& stream);

double weight_cdf(const GeneratorSpec& spec, double x);
// log P(W <= x), evaluated stably far into the left tail where the CDF
// underflows a double (lognormal needs ~ -z^2/2 for z beyond -38).
double log_weight_cdf(const GeneratorSpec& spec, double x);

// Exponent g with -log P(W <= x) ~ (log 1/x)^g; absent for the
// deterministic family whose left tail vanishes identically.
std::optional<double> log_tail_exponent(const GeneratorSpec& spec);

// E W via a quadrature route independent of the normalization path.
double mean_by_quadrature(const GeneratorSpec& spec);
double second_moment(const GeneratorSpec& spec);  // E W^2

// Distribution of log W, used by the Laplace-transform quadrature.
double log_weight_quantile(const GeneratorSpec& spec, double p);
double log_weight_pdf(const GeneratorSpec& spec, double v);
// log of log_weight_pdf; stays finite where the density underflows a
// double, which the deep-tail quadrature nodes routinely reach.
double log_weight_log_pdf(const GeneratorSpec& spec, double v);

enum class TailDirection { cdf_upper, cdf_lower };

// Grid-verified double-log tail certificate:
//   cdf_upper: P(W <= x) <= exp(-c (log 1/x)^gamma) for grid x <= x_prime
//   cdf_lower: P(W <= x) >= exp(-c (log 1/x)^gamma) for grid x <= x_prime
struct TailCertificate {
  TailDirection direction = TailDirection::cdf_lower;
  double c = 0.0;          // certified constant, safety margin applied
  double gamma = 0.0;
  double x_prime = 0.0;    // top of the validated range
  double x_min = 0.0;
  std::size_t grid_points = 0;
  double margin = 0.0;     // relative margin between extremal and certified c
  double extremal_c = 0.0; // tightest admissible constant on the grid
  double worst_x = 0.0;    // grid point attaining the extremum
  GeneratorSpec spec;
};

// Searches a log-spaced grid on [x_min, x_max] for the extremal admissible
// constant and applies a 1% safety margin. Throws if no valid certificate
// exists (deterministic-half, or gamma_target on the wrong side of the
// family's tail exponent).
TailCertificate certify_tail(const GeneratorSpec& spec, TailDirection direction,
                             double gamma_target, double x_min, double x_max,
                             std::size_t grid_points, double margin = 0.01);

// Re-checks the certified inequality pointwise on a fresh grid of the given
// resolution over [x_min, x_prime].
bool certificate_holds(const TailCertificate& cert, std::size_t grid_points);

std::string to_json_string(const TailCertificate& cert);
TailCertificate certificate_from_json_string(const std::string& text);

}  // namespace casclab
