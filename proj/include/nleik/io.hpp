#pragma once

// Persistent formats. Every writer goes through atomic_write (temporary file
// in the target directory, then rename), so readers never see partial files.
//
// Checkpoint: "NLEIK001", u32 nx, u32 ny, f64 lx, ly, t, nx*ny f64 phi
// (row-major, x fastest), f64 drift, f64 qx, f64 qy; all little-endian.
// PGM: P2 (ASCII) or P5 (16-bit little-endian samples), maxval 65535, row j = 0
// first; pixel = round(65535 (sin(phase) + 1) / 2).

#include <cstdint>
#include <string>
#include <vector>

#include "nleik/integrator.hpp"

namespace nleik {

/// Throws IoError on failure.
void atomic_write(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name; throws IoError if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Numbers in shortest round-trip form, '.' decimal, no locale.
std::string csv_string(const CsvTable& t);
void write_csv(const std::string& path, const CsvTable& t);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

enum class PgmFormat { P2, P5 };

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 65535;
  std::vector<std::uint16_t> pixels;  // row-major
};

PgmImage phase_image(const ScalarField& phase);
std::string pgm_bytes(const PgmImage& img, PgmFormat fmt);
void write_pgm(const std::string& path, const PgmImage& img, PgmFormat fmt);
PgmImage parse_pgm(const std::string& bytes);
PgmImage read_pgm(const std::string& path);

std::string checkpoint_bytes(const SimState& s);
SimState parse_checkpoint(const std::string& bytes);
void write_checkpoint(const std::string& path, const SimState& s);
SimState read_checkpoint(const std::string& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::uint64_t size = 0;
  std::string sha256;
};

struct RunManifest {
  std::string config_hash;
  std::string artifact_version;
  std::string command;
  std::string started;
  std::string finished;
  std::vector<ManifestEntry> outputs;
};

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Adds size and checksum of `dir/relative` to the manifest.
void record_output(RunManifest& m, const std::string& dir, const std::string& relative);
void write_manifest(const std::string& dir, const RunManifest& m);
RunManifest read_manifest(const std::string& dir);
/// Throws IoError naming the first missing or mismatching file.
void verify_manifest(const std::string& dir, const RunManifest& m);

/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace nleik
