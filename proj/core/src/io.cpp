#include "casclab/io.hpp"

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace casclab {

namespace {

using nlohmann::json;

std::string hex(const unsigned char* digest, unsigned len) {
  static const char* alphabet = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = alphabet[digest[i] >> 4];
    out[2 * i + 1] = alphabet[digest[i] & 0xf];
  }
  return out;
}

struct EvpCtx {
  EVP_MD_CTX* ctx;
  EvpCtx() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256 init failed");
  }
  ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sha256_bytes(const void* data, std::size_t len) {
  EvpCtx c;
  if (EVP_DigestUpdate(c.ctx, data, len) != 1)
    throw std::runtime_error("sha256 update failed");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned dlen = 0;
  if (EVP_DigestFinal_ex(c.ctx, digest, &dlen) != 1)
    throw std::runtime_error("sha256 final failed");
  return hex(digest, dlen);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);
  EvpCtx c;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(c.ctx, buf, static_cast<size_t>(got)) != 1)
      throw std::runtime_error("sha256 update failed");
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned dlen = 0;
  if (EVP_DigestFinal_ex(c.ctx, digest, &dlen) != 1)
    throw std::runtime_error("sha256 final failed");
  return hex(digest, dlen);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_csv(const std::string& path, const std::string& metadata_json,
               const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# " << (metadata_json.empty() ? "{}" : metadata_json) << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("csv row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << fmt_double(row[c]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path, std::string* metadata_json) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  CsvTable table;
  if (line.rfind("# ", 0) == 0) {
    if (metadata_json) *metadata_json = line.substr(2);
    if (!std::getline(in, line))
      throw std::runtime_error("csv missing header: " + path);
  } else if (metadata_json) {
    metadata_json->clear();
  }
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      // strtod, not stod: stod raises out_of_range on subnormals, which are
      // legitimate phi values deep in the tail.
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || cell.empty())
        throw std::runtime_error("bad csv number '" + cell + "' in " + path);
      row.push_back(v);
    }
    if (row.size() != table.columns.size())
      throw std::runtime_error("ragged csv row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_f64le(const std::string& path, const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little,
                "raw writer assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> read_f64le(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(double) != 0)
    throw std::runtime_error("f64le file size not a multiple of 8: " + path);
  std::vector<double> values(bytes / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("short read: " + path);
  return values;
}

OutputDigest digest_output(const std::string& path) {
  OutputDigest d;
  d.path = path;
  d.sha256 = sha256_file(path);
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  d.bytes = static_cast<std::uint64_t>(in.tellg());
  return d;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json j;  // nlohmann objects iterate in key order, so the dump is canonical
  j["schema_version"] = manifest.schema_version;
  j["tool_version"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["argv"] = manifest.argv;
  j["parameters"] = manifest.parameters_json.empty()
                        ? json::object()
                        : json::parse(manifest.parameters_json);
  j["master_seed"] = manifest.master_seed;
  j["chunk_size"] = manifest.chunk_size;
  j["workers"] = manifest.workers;
  j["created_utc"] = manifest.created_utc;
  json outs = json::array();
  for (const auto& o : manifest.outputs)
    outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["outputs"] = outs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  RunManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.parameters_json = j.at("parameters").dump();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.chunk_size = j.at("chunk_size").get<std::uint64_t>();
  m.workers = j.at("workers").get<int>();
  m.created_utc = j.at("created_utc").get<std::string>();
  for (const auto& o : j.at("outputs")) {
    OutputDigest d;
    d.path = o.at("path").get<std::string>();
    d.sha256 = o.at("sha256").get<std::string>();
    d.bytes = o.at("bytes").get<std::uint64_t>();
    m.outputs.push_back(d);
  }
  return m;
}

void write_laplace_csv(const std::string& path, const LaplaceTable& table) {
  json meta;
  meta["schema_version"] = 1;
  meta["kind"] = "laplace_table";
  meta["method"] =
      table.method == LaplaceMethod::iterated ? "iterated" : "empirical";
  meta["per_octave"] = table.per_octave;
  meta["iterations"] = table.iterations;
  meta["final_sup_change"] = table.final_sup_change;
  meta["converged"] = table.converged;
  meta["tol"] = table.tol;
  meta["quad_order"] = table.quad_order;
  meta["tail_mass_per_step"] = table.tail_mass_per_step;
  meta["error_bracket"] = table.error_bracket;
  meta["gamma_hint"] = table.gamma_hint;
  meta["sample_count"] = table.sample_count;

  CsvTable csv;
  csv.columns = {"t", "phi", "log_phi"};
  const bool with_se = !table.std_error.empty();
  if (with_se) csv.columns.push_back("std_error");
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    std::vector<double> row{table.t[i], table.phi(i), table.log_phi[i]};
    if (with_se) row.push_back(table.std_error[i]);
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, meta.dump(), csv);
}

LaplaceTable read_laplace_csv(const std::string& path) {
  std::string meta_text;
  const CsvTable csv = read_csv(path, &meta_text);
  if (meta_text.empty())
    throw std::runtime_error("laplace csv lacks metadata: " + path);
  json meta = json::parse(meta_text);
  if (meta.value("kind", "") != std::string("laplace_table"))
    throw std::runtime_error("not a laplace table: " + path);

  std::size_t col_t = csv.columns.size(), col_log = csv.columns.size(),
              col_se = csv.columns.size();
  for (std::size_t c = 0; c < csv.columns.size(); ++c) {
    if (csv.columns[c] == "t") col_t = c;
    if (csv.columns[c] == "log_phi") col_log = c;
    if (csv.columns[c] == "std_error") col_se = c;
  }
  if (col_t == csv.columns.size() || col_log == csv.columns.size())
    throw std::runtime_error("laplace csv missing t/log_phi columns: " + path);

  LaplaceTable table;
  table.method = meta.value("method", "iterated") == std::string("empirical")
                     ? LaplaceMethod::empirical
                     : LaplaceMethod::iterated;
  table.per_octave = meta.value("per_octave", std::size_t{0});
  table.iterations = meta.value("iterations", std::size_t{0});
  table.final_sup_change = meta.value("final_sup_change", 0.0);
  table.converged = meta.value("converged", false);
  table.tol = meta.value("tol", 0.0);
  table.quad_order = meta.value("quad_order", 0u);
  table.tail_mass_per_step = meta.value("tail_mass_per_step", 0.0);
  table.error_bracket = meta.value("error_bracket", 0.0);
  table.gamma_hint = meta.value("gamma_hint", 2.0);
  table.sample_count = meta.value("sample_count", std::size_t{0});
  for (const auto& row : csv.rows) {
    table.t.push_back(row[col_t]);
    table.log_phi.push_back(row[col_log]);
    if (col_se < csv.columns.size()) table.std_error.push_back(row[col_se]);
  }
  return table;
}

}  // namespace casclab
