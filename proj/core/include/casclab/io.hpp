#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casclab/laplace.hpp"

namespace casclab {

// Hex-encoded SHA-256.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const void* data, std::size_t len);

// ISO 8601 UTC, second resolution.
std::string utc_timestamp();

// CSV layout: one "# {json}" metadata line, a header row, then data rows
// printed with %.17g so a reload reproduces every double bit-for-bit.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const std::string& metadata_json,
               const CsvTable& table);
CsvTable read_csv(const std::string& path, std::string* metadata_json = nullptr);

// Raw little-endian float64 array. The sidecar manifest carries the digest.
void write_f64le(const std::string& path, const std::vector<double>& values);
std::vector<double> read_f64le(const std::string& path);

struct OutputDigest {
  std::string path;
  std::string sha256;
  std::uint64_t bytes = 0;
};

OutputDigest digest_output(const std::string& path);

// Everything needed to replay a run: the full argv, the resolved parameters,
// and digests of what was produced.
struct RunManifest {
  int schema_version = 1;
  std::string tool_version;
  std::string command;
  std::vector<std::string> argv;
  std::string parameters_json;  // resolved after config/flag merging
  std::uint64_t master_seed = 0;
  std::uint64_t chunk_size = 0;
  int workers = 0;
  std::string created_utc;
  std::vector<OutputDigest> outputs;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

// Laplace transform tables round-trip through CSV with their grid and
// convergence metadata, so downstream fits never recompute the transform.
void write_laplace_csv(const std::string& path, const LaplaceTable& table);
LaplaceTable read_laplace_csv(const std::string& path);

}  // namespace casclab
