// cascade-lab: batch front-end for the cascade / chaos library. Every
// data-producing subcommand writes its outputs plus a JSON manifest that is
// sufficient to replay the run bit-for-bit (see the rerun subcommand).

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "casclab/bounds.hpp"
#include "casclab/cascade.hpp"
#include "casclab/chaos.hpp"
#include "casclab/generator.hpp"
#include "casclab/io.hpp"
#include "casclab/laplace.hpp"
#include "casclab/stats.hpp"
#include "casclab/verification.hpp"

using nlohmann::json;
using namespace casclab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ExecResult {
  std::vector<std::string> outputs;
  int exit_code = 0;
  std::string note;
};

// ---------------------------------------------------------------------------
// subcommand runners. Each consumes a flat JSON parameter record; the CLI
// layer builds the record from flags, rerun replays it from a manifest.

std::vector<double> load_samples(const std::string& path,
                                 const std::string& column) {
  if (path.size() > 6 && path.substr(path.size() - 6) == ".f64le")
    return read_f64le(path);
  const CsvTable csv = read_csv(path);
  for (std::size_t c = 0; c < csv.columns.size(); ++c) {
    if (csv.columns[c] != column) continue;
    std::vector<double> out;
    out.reserve(csv.rows.size());
    for (const auto& row : csv.rows) out.push_back(row[c]);
    return out;
  }
  throw std::invalid_argument("column '" + column + "' not found in " + path);
}

ExecResult exec_cascade_sample(const json& p) {
  const auto spec = parse_spec(p.at("spec").get<std::string>());
  BatchParams bp;
  bp.depth = p.at("depth").get<int>();
  bp.count = p.at("count").get<std::size_t>();
  bp.master_seed = p.at("seed").get<std::uint64_t>();
  bp.chunk_size = p.value("chunk", std::size_t{4096});
  bp.workers = p.value("workers", 0);
  bp.depth_cap = p.value("depth-cap", kDefaultDepthCap);
  const auto ys = sample_yn_batch(spec, bp);

  const std::string out = p.at("out").get<std::string>();
  CsvTable t;
  t.columns = {"index", "y"};
  t.rows.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    t.rows.push_back({static_cast<double>(i), ys[i]});
  json meta{{"schema_version", 1},
            {"kind", "cascade_samples"},
            {"spec", spec_label(spec)},
            {"depth", bp.depth},
            {"count", bp.count},
            {"seed", bp.master_seed},
            {"chunk_size", bp.chunk_size}};
  write_csv(out, meta.dump(), t);
  return {{out}, 0, ""};
}

ExecResult exec_pool_run(const json& p) {
  const auto spec = parse_spec(p.at("spec").get<std::string>());
  CascadePool pool = pool_init(p.at("size").get<std::size_t>());
  PoolEvolveParams ep;
  ep.generations = p.value("generations", kPoolBurnIn);
  ep.master_seed = p.at("seed").get<std::uint64_t>();
  ep.chunk_size = p.value("chunk", std::size_t{4096});
  ep.workers = p.value("workers", 0);

  const std::string trace_path = p.value("trace", std::string{});
  CsvTable trace;
  trace.columns = {"generation", "mean", "sd", "min", "max"};
  const auto observer = [&](std::uint64_t gen, const std::vector<double>& v) {
    if (trace_path.empty()) return;
    double mean = 0.0, lo = v[0], hi = v[0];
    for (double x : v) {
      mean += x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    mean /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - mean) * (x - mean);
    trace.rows.push_back({static_cast<double>(gen), mean,
                          std::sqrt(s2 / (v.size() - 1)), lo, hi});
  };
  pool_evolve(pool, spec, ep, observer);

  const std::string out = p.at("out").get<std::string>();
  CsvTable t;
  t.columns = {"index", "value"};
  t.rows.reserve(pool.values.size());
  for (std::size_t i = 0; i < pool.values.size(); ++i)
    t.rows.push_back({static_cast<double>(i), pool.values[i]});
  json meta{{"schema_version", 1},
            {"kind", "pool_values"},
            {"spec", spec_label(spec)},
            {"size", pool.values.size()},
            {"generations", ep.generations},
            {"seed", ep.master_seed},
            {"chunk_size", ep.chunk_size}};
  write_csv(out, meta.dump(), t);

  ExecResult res{{out}, 0, ""};
  if (!trace_path.empty()) {
    json tmeta{{"schema_version", 1},
               {"kind", "pool_trace"},
               {"spec", spec_label(spec)},
               {"seed", ep.master_seed}};
    write_csv(trace_path, tmeta.dump(), trace);
    res.outputs.push_back(trace_path);
  }
  return res;
}

ExecResult exec_laplace_empirical(const json& p) {
  const auto samples = load_samples(p.at("in").get<std::string>(),
                                    p.value("column", std::string{"y"}));
  const auto grid = make_log_grid(p.value("tmin", 1e-2), p.value("tmax", 1e8),
                                  p.value("points", std::size_t{512}));
  LaplaceTable table = empirical_phi(samples, grid.t);
  table.per_octave = grid.per_octave;
  const std::string out = p.at("out").get<std::string>();
  write_laplace_csv(out, table);
  return {{out}, 0, ""};
}

ExecResult exec_laplace_iterate(const json& p) {
  const auto spec = parse_spec(p.at("spec").get<std::string>());
  const auto grid = make_log_grid(p.value("tmin", 1e-2), p.value("tmax", 1e8),
                                  p.value("points", std::size_t{512}));
  IterateParams ip;
  ip.tol = p.value("tol", 1e-8);
  ip.max_iter = p.value("max-iter", std::size_t{500});
  ip.quad_order = p.value("quad", 64u);
  const auto table = iterate_phi(spec, grid, ip);
  const std::string out = p.at("out").get<std::string>();
  write_laplace_csv(out, table);
  ExecResult res{{out}, 0, ""};
  if (!table.converged) {
    res.exit_code = 2;
    res.note = "iteration did not converge: sup change " +
               std::to_string(table.final_sup_change) + " after " +
               std::to_string(table.iterations) + " iterations";
  }
  return res;
}

ExecResult exec_exponent_fit(const json& p) {
  const auto table = read_laplace_csv(p.at("table").get<std::string>());
  const double lo = p.at("window-lo").get<double>();
  const double hi = p.at("window-hi").get<double>();
  const auto est = fit_exponent(table, lo, hi);

  CsvTable t;
  t.columns = {"t", "log_log_t", "log_log_inv_phi", "local_slope"};
  std::size_t k = 0;
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    if (table.t[i] < lo || table.t[i] > hi) continue;
    const double x = std::log(std::log(table.t[i]));
    const double y = std::log(-table.log_phi[i]);
    const double ls = k > 0 && k - 1 < est.fit.local_slopes.size()
                          ? est.fit.local_slopes[k - 1]
                          : std::nan("");
    t.rows.push_back({table.t[i], x, y, ls});
    ++k;
  }
  json meta{{"schema_version", 1},
            {"kind", "exponent_fit"},
            {"slope", est.fit.slope},
            {"intercept", est.fit.intercept},
            {"residual_norm", est.fit.residual_norm},
            {"points", est.fit.points},
            {"window_lo", lo},
            {"window_hi", hi}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  std::printf("slope = %.6f over %zu points in [%g, %g]\n", est.fit.slope,
              est.fit.points, lo, hi);
  return {{out}, 0, ""};
}

ExecResult exec_bounds_report(const json& p) {
  const auto table = read_laplace_csv(p.at("table").get<std::string>());

  TailCertificate cert;
  ExecResult res;
  if (p.contains("cert")) {
    cert = certificate_from_json_string(slurp(p.at("cert").get<std::string>()));
  } else if (p.value("make-cert", false)) {
    const auto spec = parse_spec(p.at("spec").get<std::string>());
    cert = certify_tail(spec, TailDirection::cdf_lower,
                        p.at("gamma").get<double>(), p.value("x-min", 1e-12),
                        p.value("x-max", 0.2),
                        p.value("grid-points", std::size_t{4096}));
    if (p.contains("cert-out")) {
      const std::string cpath = p.at("cert-out").get<std::string>();
      std::ofstream cf(cpath);
      cf << to_json_string(cert) << "\n";
      if (!cf) throw std::runtime_error("cannot write " + cpath);
      res.outputs.push_back(cpath);
    }
  } else {
    throw std::invalid_argument("bounds-report needs --cert or --make-cert");
  }

  std::vector<double> qs = p.value("q", std::vector<double>{});
  std::vector<double> negm;
  if (!qs.empty()) {
    const auto pool = load_samples(p.at("pool").get<std::string>(),
                                   p.value("pool-column", std::string{"value"}));
    for (double q : qs) negm.push_back(neg_moment(pool, q).value);
  }
  const auto report = make_bound_report(table, cert, qs, negm);

  CsvTable t;
  t.columns = {"t",           "log_phi",     "sandwich_valid",
               "log_product", "log_closed",  "log_envelope",
               "product_le_phi", "product_ge_closed", "envelope_ge_phi"};
  for (const auto& row : report.rows) {
    t.rows.push_back({row.t, row.log_phi, row.sandwich_valid ? 1.0 : 0.0,
                      row.sandwich_valid ? row.log_product : std::nan(""),
                      row.sandwich_valid ? row.log_closed : std::nan(""),
                      row.log_envelope, row.pass_product_le_phi ? 1.0 : 0.0,
                      row.pass_product_ge_closed ? 1.0 : 0.0,
                      row.pass_envelope_ge_phi ? 1.0 : 0.0});
  }
  json meta{{"schema_version", 1},
            {"kind", "bounds_report"},
            {"certificate", json::parse(to_json_string(cert))},
            {"phi_input", report.phi_input},
            {"q", qs},
            {"neg_moments", negm},
            {"all_pass", report.all_pass}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  res.outputs.insert(res.outputs.begin(), out);
  std::printf("bounds: %s (certificate c = %.6f, gamma = %g, x' = %g)\n",
              report.all_pass ? "all flags pass" : "SOME FLAGS FAIL", cert.c,
              cert.gamma, cert.x_prime);
  return res;
}

ExecResult exec_smalldev(const json& p) {
  const auto table = read_laplace_csv(p.at("table").get<std::string>());
  const auto xs = p.at("x").get<std::vector<double>>();
  const double level = p.value("level", 0.99);

  std::vector<double> pool;
  if (p.contains("pool"))
    pool = load_samples(p.at("pool").get<std::string>(),
                        p.value("pool-column", std::string{"value"}));

  CsvTable t;
  t.columns = {"x", "lower", "upper", "p_hat", "ci_lo", "ci_hi"};
  for (double x : xs) {
    double phat = std::nan(""), lo = std::nan(""), hi = std::nan("");
    if (!pool.empty()) {
      const auto hits = static_cast<std::uint64_t>(std::count_if(
          pool.begin(), pool.end(), [x](double v) { return v <= x; }));
      phat = static_cast<double>(hits) / static_cast<double>(pool.size());
      const auto ci = clopper_pearson(hits, pool.size(), level);
      lo = ci.lower;
      hi = ci.upper;
    }
    t.rows.push_back(
        {x, smalldev_lower(table, x), smalldev_upper(table, x), phat, lo, hi});
  }
  json meta{{"schema_version", 1},
            {"kind", "smalldev"},
            {"level", level},
            {"pool_size", pool.size()}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  return {{out}, 0, ""};
}

ExecResult exec_chaos_sample(const json& p) {
  const double beta = p.at("beta").get<double>();
  const double eps = p.at("eps").get<double>();
  const int n = p.value("n", 256);
  const std::size_t count = p.at("count").get<std::size_t>();
  const std::string method = p.value("method", std::string{"cov"});
  const FieldGrid grid(n);
  RngStream stream(p.at("seed").get<std::uint64_t>());

  const std::string fields_path = p.value("fields-out", std::string{});
  std::vector<double> fields_dump;
  if (!fields_path.empty())
    fields_dump.reserve(count * static_cast<std::size_t>(n));

  std::vector<double> masses;
  masses.reserve(count);
  const ChaosParams cp{beta, eps};
  if (method == "cov") {
    const auto cov = build_covariance(grid, eps);
    const auto fac = factorize_covariance(cov, n, cov[0]);
    for (std::size_t r = 0; r < count; ++r) {
      const auto field = sample_field(fac, stream);
      masses.push_back(chaos_mass(field, cp, grid));
      if (!fields_path.empty())
        fields_dump.insert(fields_dump.end(), field.begin(), field.end());
    }
  } else if (method == "whitenoise") {
    std::vector<double> points(grid.n);
    for (int i = 0; i < grid.n; ++i) points[i] = grid.x(i);
    const auto model = build_whitenoise_model(
        points, eps, p.value("cells-per-unit", 160));
    for (std::size_t r = 0; r < count; ++r) {
      const auto field = whitenoise_sample(model, stream);
      masses.push_back(chaos_mass(field, cp, grid));
      if (!fields_path.empty())
        fields_dump.insert(fields_dump.end(), field.begin(), field.end());
    }
  } else {
    throw std::invalid_argument("method must be cov or whitenoise");
  }

  CsvTable t;
  t.columns = {"index", "mass"};
  for (std::size_t i = 0; i < masses.size(); ++i)
    t.rows.push_back({static_cast<double>(i), masses[i]});
  json meta{{"schema_version", 1}, {"kind", "chaos_masses"},
            {"beta", beta},        {"eps", eps},
            {"n", n},              {"count", count},
            {"method", method},    {"seed", p.at("seed").get<std::uint64_t>()}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  ExecResult res{{out}, 0, ""};
  if (!fields_path.empty()) {
    write_f64le(fields_path, fields_dump);
    res.outputs.push_back(fields_path);
  }
  return res;
}

ExecResult exec_chaos_verify_cov(const json& p) {
  const double eps = p.at("eps").get<double>();
  const std::size_t draws = p.value("draws", std::size_t{10000});
  const std::string method = p.value("method", std::string{"whitenoise"});
  const auto lags =
      p.value("lags", std::vector<double>{0.0, 0.0625, 0.125, 0.25, 0.5});
  const double base = p.value("base", 0.25);
  RngStream stream(p.at("seed").get<std::uint64_t>());
  const double slack = p.value("slack", method == "whitenoise" ? 0.05 : 0.0);

  // evaluation points: base plus each lag, either exactly (whitenoise) or on
  // the nearest grid offsets (covariance route)
  std::vector<double> points;
  std::vector<double> actual_lags;
  std::vector<std::vector<double>> prods(lags.size());
  if (method == "cov") {
    const int n = p.value("n", 128);
    const FieldGrid grid(n);
    const int i0 = n / 4;
    std::vector<int> idx;
    for (double lag : lags) {
      const int j = i0 + static_cast<int>(std::lround(lag * n));
      if (j < 0 || j >= n)
        throw std::invalid_argument("lag outside the grid");
      idx.push_back(j);
      actual_lags.push_back(grid.x(j) - grid.x(i0));
      points.push_back(grid.x(j));
    }
    const auto cov = build_covariance(grid, eps);
    const auto fac = factorize_covariance(cov, n, cov[0]);
    for (std::size_t r = 0; r < draws; ++r) {
      const auto field = sample_field(fac, stream);
      for (std::size_t k = 0; k < idx.size(); ++k)
        prods[k].push_back(field[i0] * field[idx[k]]);
    }
    points.insert(points.begin(), grid.x(i0));
  } else if (method == "whitenoise") {
    points.push_back(base);
    for (double lag : lags) {
      points.push_back(base + lag);
      actual_lags.push_back(lag);
    }
    const auto model = build_whitenoise_model(points, eps,
                                              p.value("cells-per-unit", 160));
    for (std::size_t r = 0; r < draws; ++r) {
      const auto field = whitenoise_sample(model, stream);
      for (std::size_t k = 0; k + 1 < points.size(); ++k)
        prods[k].push_back(field[0] * field[k + 1]);
    }
  } else {
    throw std::invalid_argument("method must be cov or whitenoise");
  }

  CsvTable t;
  t.columns = {"lag", "empirical", "kernel", "std_error", "within"};
  bool all = true;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    double mean = 0.0;
    for (double v : prods[k]) mean += v;
    mean /= static_cast<double>(draws);
    double s2 = 0.0;
    for (double v : prods[k]) s2 += (v - mean) * (v - mean);
    const double se = std::sqrt(s2 / (draws - 1)) / std::sqrt(double(draws));
    const double want = kernel_value(eps, eps, 0.0, actual_lags[k]);
    const bool ok = std::abs(mean - want) <= 3.0 * se + slack;
    all = all && ok;
    t.rows.push_back({actual_lags[k], mean, want, se, ok ? 1.0 : 0.0});
  }
  json meta{{"schema_version", 1},
            {"kind", "chaos_covariance"},
            {"eps", eps},
            {"method", method},
            {"draws", draws},
            {"slack", slack},
            {"all_within", all}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  std::printf("covariance check (%s, eps = %g): %s\n", method.c_str(), eps,
              all ? "all lags within tolerance" : "SOME LAGS OUT OF TOLERANCE");
  return {{out}, 0, ""};
}

ExecResult exec_chaos_decompose(const json& p) {
  const double beta = p.at("beta").get<double>();
  const double eps_fine = p.value("eps-fine", 1.0 / 27);
  const int n = p.value("n", 243);
  const std::size_t count = p.at("count").get<std::size_t>();
  const FieldGrid grid(n);
  const DecomposeSampler sampler({beta, eps_fine}, grid);
  RngStream stream(p.at("seed").get<std::uint64_t>());

  CsvTable t;
  t.columns = {"w0", "w1", "m_total", "recombined"};
  std::vector<double> w0s, w1s, totals, recs;
  for (std::size_t r = 0; r < count; ++r) {
    const auto d = sampler.draw(stream);
    t.rows.push_back({d.w0, d.w1, d.m_total, d.recombined});
    w0s.push_back(d.w0);
    w1s.push_back(d.w1);
    totals.push_back(d.m_total);
    recs.push_back(d.recombined);
  }
  const double ks = ks_distance(Ecdf(w0s), Ecdf(w1s));
  const auto dom = dominance_check(Ecdf(totals), Ecdf(recs), 0.03);
  json meta{{"schema_version", 1},
            {"kind", "chaos_decompose"},
            {"beta", beta},
            {"eps_fine", eps_fine},
            {"n", n},
            {"count", count},
            {"seed", p.at("seed").get<std::uint64_t>()},
            {"ks_w0_w1", ks},
            {"dominance_worst_gap", dom.worst_gap}};
  const std::string out = p.at("out").get<std::string>();
  write_csv(out, meta.dump(), t);
  std::printf("decompose: KS(W0, W1) = %.4f, dominance worst gap = %.4f\n", ks,
              dom.worst_gap);
  return {{out}, 0, ""};
}

ExecResult exec_command(const std::string& command, const json& p) {
  if (command == "cascade-sample") return exec_cascade_sample(p);
  if (command == "pool-run") return exec_pool_run(p);
  if (command == "laplace-empirical") return exec_laplace_empirical(p);
  if (command == "laplace-iterate") return exec_laplace_iterate(p);
  if (command == "exponent-fit") return exec_exponent_fit(p);
  if (command == "bounds-report") return exec_bounds_report(p);
  if (command == "smalldev") return exec_smalldev(p);
  if (command == "chaos-sample") return exec_chaos_sample(p);
  if (command == "chaos-verify-cov") return exec_chaos_verify_cov(p);
  if (command == "chaos-decompose") return exec_chaos_decompose(p);
  throw std::invalid_argument("manifest names unknown command " + command);
}

int run_and_write_manifest(const std::string& command, const json& p,
                           const std::vector<std::string>& argv) {
  const auto res = exec_command(command, p);
  RunManifest m;
  m.tool_version = CASCADE_LAB_VERSION;
  m.command = command;
  m.argv = argv;
  m.parameters_json = p.dump();
  m.master_seed = p.value("seed", std::uint64_t{0});
  m.chunk_size = p.value("chunk", std::uint64_t{4096});
  m.workers = p.value("workers", 0);
  m.created_utc = utc_timestamp();
  for (const auto& path : res.outputs) m.outputs.push_back(digest_output(path));
  std::string mpath = p.value("manifest", std::string{});
  if (mpath.empty()) mpath = p.at("out").get<std::string>() + ".manifest.json";
  write_manifest(mpath, m);
  std::fprintf(stderr, "wrote %zu output(s), manifest %s\n",
               res.outputs.size(), mpath.c_str());
  if (res.exit_code != 0)
    std::fprintf(stderr, "error: %s\n", res.note.c_str());
  return res.exit_code;
}

int run_rerun(const std::string& manifest_path, int workers, bool has_workers) {
  const RunManifest m = read_manifest(manifest_path);
  json p = json::parse(m.parameters_json);
  if (has_workers) p["workers"] = workers;
  const auto res = exec_command(m.command, p);
  if (res.exit_code != 0) {
    std::fprintf(stderr, "error: %s\n", res.note.c_str());
    return res.exit_code;
  }
  bool all = true;
  for (const auto& want : m.outputs) {
    const auto got = digest_output(want.path);
    const bool same = got.sha256 == want.sha256;
    all = all && same;
    std::printf("%s %s\n", same ? "match   " : "MISMATCH", want.path.c_str());
  }
  if (!all) {
    std::fprintf(stderr, "rerun did not reproduce the recorded digests\n");
    return 2;
  }
  std::printf("all %zu output(s) byte-identical\n", m.outputs.size());
  return 0;
}

int run_verify(const std::string& suite, int workers,
               const std::string& json_out) {
  verify::Workbench bench;
  bench.workers = workers;
  const auto report = verify::run_suite(suite, bench);
  json j{{"suite", report.suite},
         {"passed", report.passed},
         {"seconds", report.seconds}};
  json checks = json::array();
  for (const auto& c : report.checks) {
    std::printf("[%s] %s: %s (%.2fs)\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.details.c_str(), c.seconds);
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"details", c.details},
                      {"seconds", c.seconds}});
  }
  j["checks"] = checks;
  if (json_out.empty()) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::ofstream out(json_out);
    out << j.dump(2) << "\n";
  }
  return report.passed ? 0 : 2;
}

// Config file pre-pass: load the JSON and splice values into argv before
// parsing. Root scalars apply to any subcommand that has the flag; a section
// object named after the subcommand applies only there and rejects unknown
// keys. Explicit flags always win, with a note on stderr.
std::string config_value_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void apply_config(std::vector<std::string>& args, const CLI::App& app) {
  std::string path;
  for (std::size_t i = 1; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
  }
  if (path.empty()) return;
  if (args.size() < 2)
    throw std::invalid_argument("--config requires a subcommand");
  const std::string sub = args[1];
  const CLI::App* subapp = app.get_subcommand_no_throw(sub);
  if (subapp == nullptr) return;  // let the parser report the bad subcommand
  const json cfg = json::parse(slurp(path));
  if (!cfg.is_object())
    throw std::invalid_argument("config root must be a JSON object");

  const auto has_flag = [&](const std::string& flag) {
    return std::find(args.begin(), args.end(), flag) != args.end();
  };
  const auto splice = [&](const std::string& key, const json& value,
                          bool from_section) {
    const CLI::Option* opt = subapp->get_option_no_throw("--" + key);
    if (opt == nullptr) opt = subapp->get_option_no_throw(key);
    if (opt == nullptr) {
      if (from_section)
        throw std::invalid_argument("config key '" + key +
                                    "' is not an option of " + sub);
      return;  // root scalar that this subcommand does not take
    }
    const std::string flag = "--" + key;
    if (!opt->get_positional() && has_flag(flag)) {
      std::fprintf(stderr,
                   "note: %s from the command line overrides the config file\n",
                   flag.c_str());
      return;
    }
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
      return;
    }
    if (!opt->get_positional()) args.push_back(flag);
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value)
        joined += (joined.empty() ? "" : ",") + config_value_to_arg(v);
      args.push_back(joined);
    } else {
      args.push_back(config_value_to_arg(value));
    }
  };

  for (const auto& [key, value] : cfg.items()) {
    if (value.is_object()) {
      if (key == sub)
        for (const auto& [k, v] : value.items()) splice(k, v, true);
    } else {
      splice(key, value, false);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  int exit_code = 0;

  CLI::App app{"Mandelbrot cascade and multiplicative chaos laboratory"};
  app.set_version_flag("--version", CASCADE_LAB_VERSION);
  app.require_subcommand(1);
  std::string config_doc;  // consumed by the pre-pass, listed here for --help
  app.add_option("--config", config_doc,
                 "JSON config file; explicit flags override its values");
  const std::vector<std::string> argv_copy(args.begin(), args.end());

  // cascade-sample -----------------------------------------------------------
  struct {
    std::string spec, out, manifest;
    int depth = 0;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::size_t chunk = 4096;
    int workers = 0;
    int depth_cap = kDefaultDepthCap;
  } cs;
  {
    auto* sub = app.add_subcommand("cascade-sample",
                                   "Draw i.i.d. depth-n cascade variables");
    sub->add_option("--spec", cs.spec,
                    "deterministic-half | lognormal:<sigma> | "
                    "log-weibull:<c>:<gamma>")
        ->required();
    sub->add_option("--depth", cs.depth, "recursion depth n")->required();
    sub->add_option("--count", cs.count, "number of samples")->required();
    sub->add_option("--seed", cs.seed, "master seed")->required();
    sub->add_option("--chunk", cs.chunk, "samples per seeded chunk");
    sub->add_option("--workers", cs.workers, "worker threads (0 = default)");
    sub->add_option("--depth-cap", cs.depth_cap, "maximum accepted depth");
    sub->add_option("--out", cs.out, "output CSV")->required();
    sub->add_option("--manifest", cs.manifest, "manifest path (default <out>.manifest.json)");
    sub->callback([&] {
      json p{{"spec", cs.spec},   {"depth", cs.depth}, {"count", cs.count},
             {"seed", cs.seed},   {"chunk", cs.chunk}, {"workers", cs.workers},
             {"depth-cap", cs.depth_cap}, {"out", cs.out}};
      if (!cs.manifest.empty()) p["manifest"] = cs.manifest;
      exit_code = run_and_write_manifest("cascade-sample", p, argv_copy);
    });
  }

  // pool-run -----------------------------------------------------------------
  struct {
    std::string spec, out, trace, manifest;
    std::size_t size = 0;
    std::uint64_t generations = kPoolBurnIn;
    std::uint64_t seed = 0;
    std::size_t chunk = 4096;
    int workers = 0;
  } pr;
  {
    auto* sub = app.add_subcommand(
        "pool-run", "Evolve a population-dynamics pool toward the fixed point");
    sub->add_option("--spec", pr.spec, "weight family")->required();
    sub->add_option("--size", pr.size, "pool size")->required();
    sub->add_option("--generations", pr.generations, "evolution steps");
    sub->add_option("--seed", pr.seed, "master seed")->required();
    sub->add_option("--chunk", pr.chunk, "slots per seeded chunk");
    sub->add_option("--workers", pr.workers, "worker threads (0 = default)");
    sub->add_option("--out", pr.out, "final pool CSV")->required();
    sub->add_option("--trace", pr.trace, "per-generation summary CSV");
    sub->add_option("--manifest", pr.manifest, "manifest path");
    sub->callback([&] {
      json p{{"spec", pr.spec},       {"size", pr.size},
             {"generations", pr.generations}, {"seed", pr.seed},
             {"chunk", pr.chunk},     {"workers", pr.workers},
             {"out", pr.out}};
      if (!pr.trace.empty()) p["trace"] = pr.trace;
      if (!pr.manifest.empty()) p["manifest"] = pr.manifest;
      exit_code = run_and_write_manifest("pool-run", p, argv_copy);
    });
  }

  // laplace-empirical --------------------------------------------------------
  struct {
    std::string in, column = "y", out, manifest;
    double tmin = 1e-2, tmax = 1e8;
    std::size_t points = 512;
  } le;
  {
    auto* sub = app.add_subcommand("laplace-empirical",
                                   "Empirical Laplace transform of a sample");
    sub->add_option("--in", le.in, "sample CSV or .f64le file")->required();
    sub->add_option("--column", le.column, "CSV column to read");
    sub->add_option("--tmin", le.tmin, "grid lower end");
    sub->add_option("--tmax", le.tmax, "grid upper end");
    sub->add_option("--points", le.points, "requested grid size");
    sub->add_option("--out", le.out, "table CSV")->required();
    sub->add_option("--manifest", le.manifest, "manifest path");
    sub->callback([&] {
      json p{{"in", le.in},     {"column", le.column}, {"tmin", le.tmin},
             {"tmax", le.tmax}, {"points", le.points}, {"out", le.out}};
      if (!le.manifest.empty()) p["manifest"] = le.manifest;
      exit_code = run_and_write_manifest("laplace-empirical", p, argv_copy);
    });
  }

  // laplace-iterate ----------------------------------------------------------
  struct {
    std::string spec, out, manifest;
    double tmin = 1e-2, tmax = 1e8, tol = 1e-8;
    std::size_t points = 512, max_iter = 500;
    unsigned quad = 64;
  } li;
  {
    auto* sub = app.add_subcommand(
        "laplace-iterate", "Laplace transform by functional iteration");
    sub->add_option("--spec", li.spec, "weight family")->required();
    sub->add_option("--tmin", li.tmin, "grid lower end");
    sub->add_option("--tmax", li.tmax, "grid upper end");
    sub->add_option("--points", li.points, "requested grid size");
    sub->add_option("--tol", li.tol, "sup-norm convergence tolerance");
    sub->add_option("--max-iter", li.max_iter, "iteration cap");
    sub->add_option("--quad", li.quad, "Gauss-Legendre order");
    sub->add_option("--out", li.out, "table CSV")->required();
    sub->add_option("--manifest", li.manifest, "manifest path");
    sub->callback([&] {
      json p{{"spec", li.spec},       {"tmin", li.tmin},
             {"tmax", li.tmax},       {"points", li.points},
             {"tol", li.tol},         {"max-iter", li.max_iter},
             {"quad", li.quad},       {"out", li.out}};
      if (!li.manifest.empty()) p["manifest"] = li.manifest;
      exit_code = run_and_write_manifest("laplace-iterate", p, argv_copy);
    });
  }

  // exponent-fit -------------------------------------------------------------
  struct {
    std::string table, out, manifest;
    double lo = 0.0, hi = 0.0;
  } ef;
  {
    auto* sub = app.add_subcommand(
        "exponent-fit", "Double-log slope of a Laplace table over a t window");
    sub->add_option("--table", ef.table, "laplace table CSV")->required();
    sub->add_option("--window-lo", ef.lo, "window lower end")->required();
    sub->add_option("--window-hi", ef.hi, "window upper end")->required();
    sub->add_option("--out", ef.out, "fit CSV")->required();
    sub->add_option("--manifest", ef.manifest, "manifest path");
    sub->callback([&] {
      json p{{"table", ef.table},
             {"window-lo", ef.lo},
             {"window-hi", ef.hi},
             {"out", ef.out}};
      if (!ef.manifest.empty()) p["manifest"] = ef.manifest;
      exit_code = run_and_write_manifest("exponent-fit", p, argv_copy);
    });
  }

  // bounds-report ------------------------------------------------------------
  struct {
    std::string spec, table, cert, cert_out, pool, out, manifest;
    std::string pool_column = "value";
    bool make_cert = false;
    double gamma = 2.0, x_min = 1e-12, x_max = 0.2;
    std::size_t grid_points = 4096;
    std::vector<double> q;
  } br;
  {
    auto* sub = app.add_subcommand(
        "bounds-report",
        "Certified lower bound and Molchan envelope across a table");
    sub->add_option("--spec", br.spec, "weight family (for --make-cert)");
    sub->add_option("--table", br.table, "laplace table CSV")->required();
    sub->add_option("--cert", br.cert, "tail certificate JSON");
    sub->add_flag("--make-cert", br.make_cert,
                  "build the certificate from --spec");
    sub->add_option("--gamma", br.gamma, "certificate tail exponent");
    sub->add_option("--x-min", br.x_min, "certificate grid lower end");
    sub->add_option("--x-max", br.x_max, "certificate x'");
    sub->add_option("--grid-points", br.grid_points, "certificate grid size");
    sub->add_option("--cert-out", br.cert_out, "write the built certificate");
    sub->add_option("--q", br.q, "envelope moments, e.g. 1,2,4")
        ->delimiter(',');
    sub->add_option("--pool", br.pool, "pool CSV for negative moments");
    sub->add_option("--pool-column", br.pool_column, "pool CSV column");
    sub->add_option("--out", br.out, "report CSV")->required();
    sub->add_option("--manifest", br.manifest, "manifest path");
    sub->callback([&] {
      json p{{"table", br.table}, {"out", br.out}};
      if (!br.spec.empty()) p["spec"] = br.spec;
      if (!br.cert.empty()) p["cert"] = br.cert;
      if (br.make_cert) {
        p["make-cert"] = true;
        p["gamma"] = br.gamma;
        p["x-min"] = br.x_min;
        p["x-max"] = br.x_max;
        p["grid-points"] = br.grid_points;
      }
      if (!br.cert_out.empty()) p["cert-out"] = br.cert_out;
      if (!br.q.empty()) {
        p["q"] = br.q;
        p["pool"] = br.pool;
        p["pool-column"] = br.pool_column;
      }
      if (!br.manifest.empty()) p["manifest"] = br.manifest;
      exit_code = run_and_write_manifest("bounds-report", p, argv_copy);
    });
  }

  // smalldev -----------------------------------------------------------------
  struct {
    std::string table, pool, out, manifest;
    std::string pool_column = "value";
    std::vector<double> x;
    double level = 0.99;
  } sd;
  {
    auto* sub = app.add_subcommand(
        "smalldev", "Laplace bridges for P(Y <= x) with optional pool CIs");
    sub->add_option("--table", sd.table, "laplace table CSV")->required();
    sub->add_option("--x", sd.x, "probe points, e.g. 0.05,0.1")
        ->required()
        ->delimiter(',');
    sub->add_option("--pool", sd.pool, "pool CSV for empirical estimates");
    sub->add_option("--pool-column", sd.pool_column, "pool CSV column");
    sub->add_option("--level", sd.level, "confidence level");
    sub->add_option("--out", sd.out, "output CSV")->required();
    sub->add_option("--manifest", sd.manifest, "manifest path");
    sub->callback([&] {
      json p{{"table", sd.table}, {"x", sd.x}, {"level", sd.level},
             {"out", sd.out}};
      if (!sd.pool.empty()) {
        p["pool"] = sd.pool;
        p["pool-column"] = sd.pool_column;
      }
      if (!sd.manifest.empty()) p["manifest"] = sd.manifest;
      exit_code = run_and_write_manifest("smalldev", p, argv_copy);
    });
  }

  // chaos-sample -------------------------------------------------------------
  struct {
    std::string out, fields_out, manifest, method = "cov";
    double beta = 0.0, eps = 0.0;
    int n = 256, cells_per_unit = 160;
    std::size_t count = 0;
    std::uint64_t seed = 0;
  } ch;
  {
    auto* sub = app.add_subcommand("chaos-sample",
                                   "Draw multiplicative chaos masses");
    sub->add_option("--beta", ch.beta, "inverse temperature")->required();
    sub->add_option("--eps", ch.eps, "truncation scale")->required();
    sub->add_option("--n", ch.n, "grid size");
    sub->add_option("--count", ch.count, "number of draws")->required();
    sub->add_option("--seed", ch.seed, "stream seed")->required();
    sub->add_option("--method", ch.method, "cov | whitenoise");
    sub->add_option("--cells-per-unit", ch.cells_per_unit,
                    "white-noise cell density");
    sub->add_option("--out", ch.out, "mass CSV")->required();
    sub->add_option("--fields-out", ch.fields_out, "raw field dump (.f64le)");
    sub->add_option("--manifest", ch.manifest, "manifest path");
    sub->callback([&] {
      json p{{"beta", ch.beta},   {"eps", ch.eps},
             {"n", ch.n},         {"count", ch.count},
             {"seed", ch.seed},   {"method", ch.method},
             {"cells-per-unit", ch.cells_per_unit}, {"out", ch.out}};
      if (!ch.fields_out.empty()) p["fields-out"] = ch.fields_out;
      if (!ch.manifest.empty()) p["manifest"] = ch.manifest;
      exit_code = run_and_write_manifest("chaos-sample", p, argv_copy);
    });
  }

  // chaos-verify-cov ---------------------------------------------------------
  struct {
    std::string out, manifest, method = "whitenoise";
    double eps = 0.25, base = 0.25, slack = -1.0;
    int n = 128, cells_per_unit = 160;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
    std::vector<double> lags{0.0, 0.0625, 0.125, 0.25, 0.5};
  } cv;
  {
    auto* sub = app.add_subcommand(
        "chaos-verify-cov",
        "Empirical field covariance against the kernel at probe lags");
    sub->add_option("--eps", cv.eps, "truncation scale");
    sub->add_option("--n", cv.n, "grid size (cov method)");
    sub->add_option("--draws", cv.draws, "number of field draws");
    sub->add_option("--seed", cv.seed, "stream seed")->required();
    sub->add_option("--method", cv.method, "cov | whitenoise");
    sub->add_option("--cells-per-unit", cv.cells_per_unit,
                    "white-noise cell density");
    sub->add_option("--lags", cv.lags, "probe lags")->delimiter(',');
    sub->add_option("--base", cv.base, "anchor point");
    sub->add_option("--slack", cv.slack,
                    "extra absolute slack (default 0.05 for whitenoise)");
    sub->add_option("--out", cv.out, "comparison CSV")->required();
    sub->add_option("--manifest", cv.manifest, "manifest path");
    sub->callback([&] {
      json p{{"eps", cv.eps},     {"n", cv.n},
             {"draws", cv.draws}, {"seed", cv.seed},
             {"method", cv.method}, {"cells-per-unit", cv.cells_per_unit},
             {"lags", cv.lags},   {"base", cv.base},
             {"out", cv.out}};
      if (cv.slack >= 0.0) p["slack"] = cv.slack;
      if (!cv.manifest.empty()) p["manifest"] = cv.manifest;
      exit_code = run_and_write_manifest("chaos-verify-cov", p, argv_copy);
    });
  }

  // chaos-decompose ----------------------------------------------------------
  struct {
    std::string out, manifest;
    double beta = 0.5, eps_fine = 1.0 / 27;
    int n = 243;
    std::size_t count = 0;
    std::uint64_t seed = 0;
  } cd;
  {
    auto* sub = app.add_subcommand(
        "chaos-decompose",
        "Coupled coarse/fine draws for the scale decomposition");
    sub->add_option("--beta", cd.beta, "inverse temperature");
    sub->add_option("--eps-fine", cd.eps_fine, "fine truncation scale");
    sub->add_option("--n", cd.n, "grid size");
    sub->add_option("--count", cd.count, "number of draws")->required();
    sub->add_option("--seed", cd.seed, "stream seed")->required();
    sub->add_option("--out", cd.out, "draw CSV")->required();
    sub->add_option("--manifest", cd.manifest, "manifest path");
    sub->callback([&] {
      json p{{"beta", cd.beta},   {"eps-fine", cd.eps_fine}, {"n", cd.n},
             {"count", cd.count}, {"seed", cd.seed},         {"out", cd.out}};
      if (!cd.manifest.empty()) p["manifest"] = cd.manifest;
      exit_code = run_and_write_manifest("chaos-decompose", p, argv_copy);
    });
  }

  // verify -------------------------------------------------------------------
  struct {
    std::string suite, json_out;
    int workers = 0;
  } vf;
  {
    auto* sub = app.add_subcommand("verify", "Run a named check suite");
    sub->add_option("suite", vf.suite, "one of: degenerate, martingale, "
                    "fixpoint, sandwich, chaos-cov, chaos-mass, decompose, "
                    "alpha")
        ->required();
    sub->add_option("--workers", vf.workers, "worker threads (0 = default)");
    sub->add_option("--json", vf.json_out, "write the report JSON here");
    sub->callback(
        [&] { exit_code = run_verify(vf.suite, vf.workers, vf.json_out); });
  }

  // rerun --------------------------------------------------------------------
  struct {
    std::string manifest;
    int workers = 0;
    bool has_workers = false;
  } rr;
  {
    auto* sub = app.add_subcommand(
        "rerun", "Re-execute a manifest and compare output digests");
    sub->add_option("--manifest", rr.manifest, "manifest JSON")->required();
    auto* w = sub->add_option("--workers", rr.workers,
                              "override the recorded worker count");
    sub->callback([&, w] {
      rr.has_workers = w->count() > 0;
      exit_code = run_rerun(rr.manifest, rr.workers, rr.has_workers);
    });
  }

  try {
    apply_config(args, app);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return exit_code;
}
