#include "casclab/generator.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <nlohmann/json.hpp>

namespace casclab {

namespace {

constexpr double kMeanTol = 1e-10;

using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;

const boost::math::normal_distribution<double>& std_normal() {
  static const boost::math::normal_distribution<double> n(0.0, 1.0);
  return n;
}

// Survival and density of V with P(V > v) = exp(-c v^gamma), v >= 0.
double weibull_pdf(double c, double gamma, double v) {
  if (v <= 0.0) return 0.0;
  return c * gamma * std::pow(v, gamma - 1.0) * std::exp(-c * std::pow(v, gamma));
}

// E exp(-q V) over the truncated range [0, v_max] with the tail below 1e-16.
double exp_moment_of_weibull(double c, double gamma, double q) {
  const double v_max = std::pow(37.0 / c, 1.0 / gamma) + 37.0 / q;
  return Quad::integrate(
      [c, gamma, q](double v) { return std::exp(-q * v) * weibull_pdf(c, gamma, v); },
      0.0, v_max, 15, 1e-14);
}

// log Phi(z) without underflow; asymptotic Mills-ratio series below z = -30.
double log_normal_cdf(double z) {
  if (z > -30.0) {
    return std::log(boost::math::cdf(std_normal(), z));
  }
  const double z2 = z * z;
  const double series = -1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * std::log(2.0 * M_PI) - std::log(-z) +
         std::log1p(series);
}

void check_mean(const GeneratorSpec& spec) {
  const double m = mean_by_quadrature(spec);
  if (std::abs(m - 0.5) > kMeanTol) {
    std::ostringstream os;
    os << "generator: quadrature mean " << m << " deviates from 1/2 beyond "
       << kMeanTol;
    throw std::runtime_error(os.str());
  }
}

}  // namespace

GeneratorSpec make_deterministic_half() {
  GeneratorSpec spec;
  spec.family = WeightFamily::deterministic_half;
  return spec;
}

GeneratorSpec make_lognormal(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("make_lognormal: sigma must be positive");
  GeneratorSpec spec;
  spec.family = WeightFamily::lognormal;
  spec.sigma = sigma;
  spec.mu = -std::log(2.0) - 0.5 * sigma * sigma;  // forces E W = 1/2
  check_mean(spec);
  return spec;
}

GeneratorSpec make_log_weibull(double c, double gamma) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("make_log_weibull: c must be positive");
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw std::invalid_argument("make_log_weibull: gamma must exceed 1");
  GeneratorSpec spec;
  spec.family = WeightFamily::log_weibull;
  spec.c = c;
  spec.gamma = gamma;
  spec.scale = 0.5 / exp_moment_of_weibull(c, gamma, 1.0);
  check_mean(spec);
  return spec;
}

GeneratorSpec parse_spec(const std::string& text) {
  if (text == "deterministic-half") return make_deterministic_half();
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto next = s.find(':', pos);
      if (next == std::string::npos) {
        parts.push_back(s.substr(pos));
        break;
      }
      parts.push_back(s.substr(pos, next - pos));
      pos = next + 1;
    }
    return parts;
  };
  const auto parts = split(text);
  try {
    if (parts.size() == 2 && parts[0] == "lognormal")
      return make_lognormal(std::stod(parts[1]));
    if (parts.size() == 3 && parts[0] == "log-weibull")
      return make_log_weibull(std::stod(parts[1]), std::stod(parts[2]));
  } catch (const std::invalid_argument&) {
    // fall through to the uniform error below
  }
  throw std::invalid_argument(
      "parse_spec: expected deterministic-half, lognormal:<sigma> or "
      "log-weibull:<c>:<gamma>, got '" + text + "'");
}

std::string spec_label(const GeneratorSpec& spec) {
  std::ostringstream os;
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return "deterministic-half";
    case WeightFamily::lognormal:
      os << "lognormal:" << spec.sigma;
      return os.str();
    case WeightFamily::log_weibull:
      os << "log-weibull:" << spec.c << ":" << spec.gamma;
      return os.str();
  }
  return "?";
}

double sample_weight(const GeneratorSpec& spec, RngStream& stream) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return 0.5;
    case WeightFamily::lognormal:
      return std::exp(spec.mu + spec.sigma * stream.normal());
    case WeightFamily::log_weibull: {
      // uniform() is in (0,1], used as the survival probability of V.
      const double v = std::pow(-std::log(stream.uniform()) / spec.c,
                                1.0 / spec.gamma);
      return spec.scale * std::exp(-v);
    }
  }
  throw std::logic_error("sample_weight: bad family");
}

double weight_cdf(const GeneratorSpec& spec, double x) {
  if (x <= 0.0) return 0.0;
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return x >= 0.5 ? 1.0 : 0.0;
    case WeightFamily::lognormal:
      return boost::math::cdf(std_normal(),
                              (std::log(x) - spec.mu) / spec.sigma);
    case WeightFamily::log_weibull: {
      if (x >= spec.scale) return 1.0;
      const double v = std::log(spec.scale / x);
      return std::exp(-spec.c * std::pow(v, spec.gamma));
    }
  }
  throw std::logic_error("weight_cdf: bad family");
}

double log_weight_cdf(const GeneratorSpec& spec, double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return x >= 0.5 ? 0.0 : -std::numeric_limits<double>::infinity();
    case WeightFamily::lognormal:
      return log_normal_cdf((std::log(x) - spec.mu) / spec.sigma);
    case WeightFamily::log_weibull: {
      if (x >= spec.scale) return 0.0;
      const double v = std::log(spec.scale / x);
      return -spec.c * std::pow(v, spec.gamma);
    }
  }
  throw std::logic_error("log_weight_cdf: bad family");
}

std::optional<double> log_tail_exponent(const GeneratorSpec& spec) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return std::nullopt;
    case WeightFamily::lognormal:
      return 2.0;
    case WeightFamily::log_weibull:
      return spec.gamma;
  }
  throw std::logic_error("log_tail_exponent: bad family");
}

double mean_by_quadrature(const GeneratorSpec& spec) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return 0.5;
    case WeightFamily::lognormal: {
      const double mu = spec.mu, sigma = spec.sigma;
      return Quad::integrate(
          [mu, sigma](double z) {
            return std::exp(mu + sigma * z) *
                   std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
          },
          -40.0, 40.0 + sigma, 15, 1e-13);
    }
    case WeightFamily::log_weibull: {
      // Quantile-space route, independent of the density integral that
      // fixed the scale.
      const double c = spec.c, gamma = spec.gamma, s = spec.scale;
      return Quad::integrate(
          [c, gamma, s](double u) {
            return s * std::exp(-std::pow(-std::log(u) / c, 1.0 / gamma));
          },
          0.0, 1.0, 15, 1e-13);
    }
  }
  throw std::logic_error("mean_by_quadrature: bad family");
}

double second_moment(const GeneratorSpec& spec) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return 0.25;
    case WeightFamily::lognormal:
      return std::exp(2.0 * spec.mu + 2.0 * spec.sigma * spec.sigma);
    case WeightFamily::log_weibull:
      return spec.scale * spec.scale *
             exp_moment_of_weibull(spec.c, spec.gamma, 2.0);
  }
  throw std::logic_error("second_moment: bad family");
}

double log_weight_quantile(const GeneratorSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("log_weight_quantile: p must be in (0,1)");
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      return std::log(0.5);
    case WeightFamily::lognormal:
      return spec.mu + spec.sigma * boost::math::quantile(std_normal(), p);
    case WeightFamily::log_weibull:
      // P(log W <= y) = exp(-c (log s - y)^gamma)
      return std::log(spec.scale) -
             std::pow(-std::log(p) / spec.c, 1.0 / spec.gamma);
  }
  throw std::logic_error("log_weight_quantile: bad family");
}

double log_weight_pdf(const GeneratorSpec& spec, double v) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      throw std::invalid_argument("log_weight_pdf: point mass has no density");
    case WeightFamily::lognormal: {
      const double z = (v - spec.mu) / spec.sigma;
      return std::exp(-0.5 * z * z) / (spec.sigma * std::sqrt(2.0 * M_PI));
    }
    case WeightFamily::log_weibull:
      return weibull_pdf(spec.c, spec.gamma, std::log(spec.scale) - v);
  }
  throw std::logic_error("log_weight_pdf: bad family");
}

double log_weight_log_pdf(const GeneratorSpec& spec, double v) {
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      throw std::invalid_argument(
          "log_weight_log_pdf: point mass has no density");
    case WeightFamily::lognormal: {
      const double z = (v - spec.mu) / spec.sigma;
      return -0.5 * z * z - std::log(spec.sigma * std::sqrt(2.0 * M_PI));
    }
    case WeightFamily::log_weibull: {
      const double x = std::log(spec.scale) - v;
      if (x <= 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(spec.c * spec.gamma) +
             (spec.gamma - 1.0) * std::log(x) -
             spec.c * std::pow(x, spec.gamma);
    }
  }
  throw std::logic_error("log_weight_log_pdf: bad family");
}

namespace {

void validate_certificate_request(const GeneratorSpec& spec,
                                  TailDirection direction, double gamma_target,
                                  double x_min, double x_max) {
  const auto exponent = log_tail_exponent(spec);
  if (!exponent) {
    throw std::invalid_argument(
        "certify_tail: the deterministic family has no left tail; no "
        "double-log certificate exists");
  }
  if (direction == TailDirection::cdf_upper && gamma_target > *exponent) {
    throw std::invalid_argument(
        "certify_tail: upper certificate needs gamma_target <= tail exponent");
  }
  if (direction == TailDirection::cdf_lower && gamma_target < *exponent) {
    throw std::invalid_argument(
        "certify_tail: lower certificate needs gamma_target >= tail exponent");
  }
  if (!(x_min > 0.0 && x_min < x_max && x_max < 1.0)) {
    throw std::invalid_argument(
        "certify_tail: need 0 < x_min < x_max < 1");
  }
  if (weight_cdf(spec, x_max) >= 1.0) {
    throw std::invalid_argument(
        "certify_tail: x_max reaches the top of the weight support");
  }
}

// Admissible constant at a single point: c_x = -log P(W <= x) / (log 1/x)^g.
double point_constant(const GeneratorSpec& spec, double gamma_target,
                      double x) {
  const double lp = log_weight_cdf(spec, x);
  if (!(lp < 0.0)) return 0.0;  // CDF already 1
  if (std::isinf(lp)) return std::numeric_limits<double>::infinity();
  return -lp / std::pow(-std::log(x), gamma_target);
}

}  // namespace

TailCertificate certify_tail(const GeneratorSpec& spec, TailDirection direction,
                             double gamma_target, double x_min, double x_max,
                             std::size_t grid_points, double margin) {
  validate_certificate_request(spec, direction, gamma_target, x_min, x_max);
  if (grid_points < 2)
    throw std::invalid_argument("certify_tail: need at least 2 grid points");
  if (!(margin > 0.0 && margin < 1.0))
    throw std::invalid_argument("certify_tail: margin must be in (0,1)");

  const double l0 = std::log(x_min);
  const double l1 = std::log(x_max);
  double extremal = (direction == TailDirection::cdf_lower)
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
  double worst_x = x_min;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x =
        std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                          static_cast<double>(grid_points - 1));
    const double cx = point_constant(spec, gamma_target, x);
    if (direction == TailDirection::cdf_lower) {
      if (std::isinf(cx)) {
        throw std::runtime_error(
            "certify_tail: CDF vanishes on the grid; no finite lower "
            "certificate");
      }
      if (cx > extremal) {
        extremal = cx;
        worst_x = x;
      }
    } else {
      if (cx < extremal) {
        extremal = cx;
        worst_x = x;
      }
    }
  }
  if (direction == TailDirection::cdf_upper && !(extremal > 0.0)) {
    throw std::runtime_error(
        "certify_tail: no positive constant is admissible on the grid");
  }

  TailCertificate cert;
  cert.direction = direction;
  cert.gamma = gamma_target;
  cert.x_prime = x_max;
  cert.x_min = x_min;
  cert.grid_points = grid_points;
  cert.margin = margin;
  cert.extremal_c = extremal;
  cert.worst_x = worst_x;
  cert.spec = spec;
  cert.c = (direction == TailDirection::cdf_lower) ? extremal * (1.0 + margin)
                                                   : extremal * (1.0 - margin);
  return cert;
}

bool certificate_holds(const TailCertificate& cert, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("certificate_holds: grid");
  const double l0 = std::log(cert.x_min);
  const double l1 = std::log(cert.x_prime);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x =
        std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                          static_cast<double>(grid_points - 1));
    const double lp = log_weight_cdf(cert.spec, x);
    const double claimed = -cert.c * std::pow(-std::log(x), cert.gamma);
    if (cert.direction == TailDirection::cdf_lower) {
      if (!(claimed <= lp)) return false;
    } else {
      if (!(lp <= claimed)) return false;
    }
  }
  return true;
}

namespace {

nlohmann::json spec_to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  switch (spec.family) {
    case WeightFamily::deterministic_half:
      j["family"] = "deterministic-half";
      break;
    case WeightFamily::lognormal:
      j["family"] = "lognormal";
      j["sigma"] = spec.sigma;
      break;
    case WeightFamily::log_weibull:
      j["family"] = "log-weibull";
      j["c"] = spec.c;
      j["gamma"] = spec.gamma;
      break;
  }
  return j;
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "deterministic-half") return make_deterministic_half();
  if (family == "lognormal") return make_lognormal(j.at("sigma").get<double>());
  if (family == "log-weibull")
    return make_log_weibull(j.at("c").get<double>(),
                            j.at("gamma").get<double>());
  throw std::invalid_argument("unknown weight family: " + family);
}

}  // namespace

std::string to_json_string(const GeneratorSpec& spec) {
  return spec_to_json(spec).dump();
}

GeneratorSpec spec_from_json_string(const std::string& text) {
  return spec_from_json(nlohmann::json::parse(text));
}

std::string to_json_string(const TailCertificate& cert) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["direction"] =
      cert.direction == TailDirection::cdf_lower ? "cdf-lower" : "cdf-upper";
  j["c"] = cert.c;
  j["gamma"] = cert.gamma;
  j["x_prime"] = cert.x_prime;
  j["x_min"] = cert.x_min;
  j["grid_points"] = cert.grid_points;
  j["margin"] = cert.margin;
  j["extremal_c"] = cert.extremal_c;
  j["worst_x"] = cert.worst_x;
  j["spec"] = spec_to_json(cert.spec);
  return j.dump(2);
}

TailCertificate certificate_from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TailCertificate cert;
  const std::string dir = j.at("direction").get<std::string>();
  if (dir == "cdf-lower") {
    cert.direction = TailDirection::cdf_lower;
  } else if (dir == "cdf-upper") {
    cert.direction = TailDirection::cdf_upper;
  } else {
    throw std::invalid_argument("certificate: bad direction " + dir);
  }
  cert.c = j.at("c").get<double>();
  cert.gamma = j.at("gamma").get<double>();
  cert.x_prime = j.at("x_prime").get<double>();
  cert.x_min = j.at("x_min").get<double>();
  cert.grid_points = j.at("grid_points").get<std::size_t>();
  cert.margin = j.at("margin").get<double>();
  cert.extremal_c = j.at("extremal_c").get<double>();
  cert.worst_x = j.at("worst_x").get<double>();
  cert.spec = spec_from_json(j.at("spec"));
  return cert;
}

}  // namespace casclab
