#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/io.hpp"

using namespace nleik;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

template <class T>
T read_le(const std::string& b, std::size_t off) {
  static_assert(std::endian::native == std::endian::little);
  T v;
  std::memcpy(&v, b.data() + off, sizeof(T));
  return v;
}

SimState sample_state() {
  SimState s;
  s.phi = ScalarField::from_function(Grid2D(10, 8, 6.0, 3.5), [](double x, double y) { return std::sin(x) - 0.3 * y; });
  s.t = 12.375;
  s.drift = -0.0625;
  s.qx = 0.1;
  s.qy = -1e-300;
  return s;
}

}  // namespace

TEST_CASE("CSV round trip", "[io]") {
  CsvTable t;
  t.header = {"t", "phi_probe0", "phi_probe1"};
  t.rows = {{0.0, 0.1, -1.0 / 3.0}, {0.5, 1e-300, 6.02214076e23}, {1.0, -0.0, 5e-324}};
  const std::string text = csv_string(t);
  CHECK(text.rfind("t,phi_probe0,phi_probe1\n", 0) == 0);
  CHECK(text.find("0.1") != std::string::npos);
  const CsvTable u = parse_csv(text);
  CHECK(u.header == t.header);
  CHECK(u.rows == t.rows);
  CHECK(u.column("phi_probe1") == 2);
  CHECK(u.column_values("t") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(u.column("nope"), IoError);
  CHECK_THROWS_AS(parse_csv(""), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), IoError);

  TempDir d("nleik_test_csv");
  write_csv(d / "p.csv", t);
  CHECK(read_csv(d / "p.csv").rows == t.rows);
  CHECK(read_file(d / "p.csv") == text);
}

TEST_CASE("PGM phase images", "[io]") {
  const Grid2D g(8, 8, 8.0, 8.0);
  ScalarField phase(g);
  const double pi = std::numbers::pi;
  const std::vector<double> v = {0.0, pi / 2, -pi / 2, pi / 6, 1.0, 2.0, 3.0, 4.0};
  std::copy(v.begin(), v.end(), phase.values.begin());
  const PgmImage img = phase_image(phase);
  REQUIRE(img.width == 8);
  REQUIRE(img.height == 8);
  CHECK(img.maxval == 65535);
  CHECK(img.pixels[0] == 32768);  // round(65535 / 2)
  CHECK(img.pixels[1] == 65535);
  CHECK(img.pixels[2] == 0);
  CHECK(img.pixels[3] == 49151);  // round(65535 * 0.75)
  for (std::size_t k = 0; k < v.size(); ++k)
    CHECK(img.pixels[k] == static_cast<std::uint16_t>(std::lround(65535.0 * (std::sin(v[k]) + 1.0) / 2.0)));

  SECTION("P5 layout: header then little-endian 16-bit samples") {
    const std::string b = pgm_bytes(img, PgmFormat::P5);
    const std::string header = "P5\n8 8\n65535\n";
    REQUIRE(b.size() == header.size() + 128);
    CHECK(b.substr(0, header.size()) == header);
    for (std::size_t k = 0; k < 8; ++k) CHECK(read_le<std::uint16_t>(b, header.size() + 2 * k) == img.pixels[k]);
    const PgmImage back = parse_pgm(b);
    CHECK(back.pixels == img.pixels);
    CHECK(back.width == 8);
  }
  SECTION("P2 round trip") {
    const std::string b = pgm_bytes(img, PgmFormat::P2);
    CHECK(b.rfind("P2\n8 8\n65535\n", 0) == 0);
    CHECK(parse_pgm(b).pixels == img.pixels);
    CHECK(parse_pgm("P2\n# comment\n2 1\n65535\n7 9\n").pixels == std::vector<std::uint16_t>{7, 9});
  }
  SECTION("malformed images") {
    CHECK_THROWS_AS(parse_pgm("P6\n1 1\n255\n\0\0\0"), IoError);
    CHECK_THROWS_AS(parse_pgm("P5\n2 2\n65535\nab"), IoError);
    CHECK_THROWS_AS(parse_pgm("P2\n2 1\n65535\n1\n"), IoError);
  }
  SECTION("files") {
    TempDir d("nleik_test_pgm");
    write_pgm(d / "a.pgm", img, PgmFormat::P5);
    CHECK(read_pgm(d / "a.pgm").pixels == img.pixels);
  }
}

TEST_CASE("checkpoint byte layout", "[io]") {
  const SimState s = sample_state();
  const std::string b = checkpoint_bytes(s);
  REQUIRE(b.size() == 8 + 4 + 4 + 3 * 8 + 80 * 8 + 3 * 8);
  CHECK(b.substr(0, 8) == "NLEIK001");
  CHECK(read_le<std::uint32_t>(b, 8) == 10);
  CHECK(read_le<std::uint32_t>(b, 12) == 8);
  CHECK(read_le<double>(b, 16) == 6.0);
  CHECK(read_le<double>(b, 24) == 3.5);
  CHECK(read_le<double>(b, 32) == 12.375);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 10; ++i) CHECK(read_le<double>(b, 40 + 8 * (j * 10 + i)) == s.phi.at(i, j));
  const std::size_t tail = 40 + 80 * 8;
  CHECK(read_le<double>(b, tail) == -0.0625);
  CHECK(read_le<double>(b, tail + 8) == 0.1);
  CHECK(read_le<double>(b, tail + 16) == -1e-300);

  const SimState back = parse_checkpoint(b);
  CHECK(back.phi.grid == s.phi.grid);
  CHECK(back.phi.values == s.phi.values);
  CHECK(back.t == s.t);
  CHECK(back.drift == s.drift);
  CHECK(back.qx == s.qx);
  CHECK(back.qy == s.qy);
  CHECK(checkpoint_bytes(back) == b);

  CHECK_THROWS_AS(parse_checkpoint("NLEIK002" + b.substr(8)), IoError);
  CHECK_THROWS_AS(parse_checkpoint(b.substr(0, b.size() - 1)), IoError);
  CHECK_THROWS_AS(parse_checkpoint(b + "x"), IoError);

  TempDir d("nleik_test_ckpt");
  write_checkpoint(d / "s.bin", s);
  CHECK(read_checkpoint(d / "s.bin").phi.values == s.phi.values);
  CHECK_THROWS_AS(read_checkpoint(d / "missing.bin"), IoError);
}

TEST_CASE("SHA-256 test vectors", "[io]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("manifests detect tampering", "[io]") {
  TempDir d("nleik_test_manifest");
  atomic_write(d / "a.csv", "t\n1\n");
  fs::create_directories(d.path / "snap");
  atomic_write(d / "snap/b.bin", std::string(100, '\x01'));
  RunManifest m;
  m.config_hash = sha256_hex("cfg");
  m.artifact_version = kArtifactVersion;
  m.command = "simulate";
  m.started = utc_timestamp();
  m.finished = utc_timestamp();
  record_output(m, d.path.string(), "a.csv");
  record_output(m, d.path.string(), "snap/b.bin");
  REQUIRE(m.outputs.size() == 2);
  CHECK(m.outputs[0].size == 4);
  CHECK(m.outputs[0].sha256 == sha256_hex("t\n1\n"));
  CHECK(m.outputs[1].size == 100);
  CHECK(m.started.size() == 20);
  CHECK(m.started.back() == 'Z');

  write_manifest(d.path.string(), m);
  const RunManifest r = read_manifest(d.path.string());
  CHECK(r.config_hash == m.config_hash);
  CHECK(r.command == "simulate");
  CHECK(r.artifact_version == "1.0.0");
  REQUIRE(r.outputs.size() == 2);
  CHECK(r.outputs[1].path == "snap/b.bin");
  CHECK_NOTHROW(verify_manifest(d.path.string(), r));

  SECTION("modified content") {
    atomic_write(d / "a.csv", "t\n2\n");
    try {
      verify_manifest(d.path.string(), r);
      FAIL("tampering not detected");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("a.csv") != std::string::npos);
    }
  }
  SECTION("missing file") {
    fs::remove(d.path / "snap/b.bin");
    CHECK_THROWS_AS(verify_manifest(d.path.string(), r), IoError);
  }
  SECTION("no manifest") {
    fs::remove(d.path / "manifest.json");
    CHECK_THROWS_AS(read_manifest(d.path.string()), IoError);
  }
}

TEST_CASE("atomic writes leave no temporaries", "[io]") {
  TempDir d("nleik_test_atomic");
  atomic_write(d / "x", "first");
  atomic_write(d / "x", "second");
  CHECK(read_file(d / "x") == "second");
  int n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(d.path)) ++n;
  CHECK(n == 1);
  atomic_write(d / "made/on/demand", "z");
  CHECK(read_file(d / "made/on/demand") == "z");
  // parent is a regular file
  CHECK_THROWS_AS(atomic_write(d / "x/y", "y"), IoError);
  CHECK_THROWS_AS(read_file(d / "absent"), IoError);
}
