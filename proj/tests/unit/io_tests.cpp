#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "casclab/io.hpp"
#include "casclab/laplace.hpp"

using namespace casclab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("casclab-io-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("csv round trip preserves doubles bitwise") {
  TempDir dir;
  CsvTable t;
  t.columns = {"a", "b"};
  t.rows = {{1.0, 0.1},
            {1e308, 5e-324},               // max normal, smallest subnormal
            {-3.141592653589793, 1e-310},  // subnormal again
            {0.0, 123456789.123456789}};
  write_csv(dir.file("t.csv"), "{\"kind\":\"demo\"}", t);
  std::string meta;
  const auto back = read_csv(dir.file("t.csv"), &meta);
  CHECK(meta == "{\"kind\":\"demo\"}");
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < 2; ++c)
      REQUIRE(back.rows[r][c] == t.rows[r][c]);
}

TEST_CASE("csv reader rejects malformed input") {
  TempDir dir;
  {
    std::ofstream out(dir.file("bad.csv"));
    out << "a,b\n1,2\n3\n";
  }
  CHECK_THROWS(read_csv(dir.file("bad.csv")));
  {
    std::ofstream out(dir.file("notnum.csv"));
    out << "a\nhello\n";
  }
  CHECK_THROWS(read_csv(dir.file("notnum.csv")));
  CHECK_THROWS(read_csv(dir.file("missing.csv")));
}

TEST_CASE("raw f64 files round trip bitwise") {
  TempDir dir;
  const std::vector<double> values{0.0, -1.5, 5e-324, 1e308, 3.14};
  write_f64le(dir.file("v.f64le"), values);
  const auto back = read_f64le(dir.file("v.f64le"));
  REQUIRE(back.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    REQUIRE(back[i] == values[i]);
}

TEST_CASE("sha256 of known content") {
  TempDir dir;
  {
    std::ofstream out(dir.file("empty"), std::ios::binary);
  }
  CHECK(sha256_file(dir.file("empty")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  {
    std::ofstream out(dir.file("abc"), std::ios::binary);
    out << "abc";
  }
  CHECK(sha256_file(dir.file("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest round trip") {
  TempDir dir;
  {
    std::ofstream out(dir.file("out.csv"));
    out << "x\n1\n";
  }
  RunManifest m;
  m.tool_version = "9.9.9";
  m.command = "demo";
  m.argv = {"demo", "--flag", "1"};
  m.parameters_json = "{\"flag\":1}";
  m.master_seed = 42;
  m.chunk_size = 1024;
  m.workers = 3;
  m.created_utc = utc_timestamp();
  m.outputs.push_back(digest_output(dir.file("out.csv")));
  write_manifest(dir.file("m.json"), m);

  const auto back = read_manifest(dir.file("m.json"));
  CHECK(back.tool_version == m.tool_version);
  CHECK(back.command == m.command);
  CHECK(back.argv == m.argv);
  CHECK(back.parameters_json == m.parameters_json);
  CHECK(back.master_seed == 42);
  CHECK(back.chunk_size == 1024);
  CHECK(back.workers == 3);
  REQUIRE(back.outputs.size() == 1);
  CHECK(back.outputs[0].path == m.outputs[0].path);
  CHECK(back.outputs[0].sha256 == m.outputs[0].sha256);
  CHECK(back.outputs[0].bytes == m.outputs[0].bytes);
}

TEST_CASE("laplace table csv round trip") {
  TempDir dir;
  const auto grid = make_log_grid(1e-2, 1e8, 128);
  const auto table = iterate_phi(make_lognormal(0.5), grid);
  write_laplace_csv(dir.file("phi.csv"), table);
  const auto back = read_laplace_csv(dir.file("phi.csv"));
  REQUIRE(back.t.size() == table.t.size());
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    REQUIRE(back.t[i] == table.t[i]);
    REQUIRE(back.log_phi[i] == table.log_phi[i]);
  }
  CHECK(back.method == table.method);
  CHECK(back.per_octave == table.per_octave);
  CHECK(back.converged == table.converged);
  CHECK(back.tol == table.tol);
  CHECK(back.error_bracket == table.error_bracket);
  CHECK(back.gamma_hint == table.gamma_hint);
}

TEST_CASE("timestamps are utc iso-8601") {
  const auto ts = utc_timestamp();
  REQUIRE(ts.size() == 20);
  CHECK(ts[4] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts.back() == 'Z');
}
