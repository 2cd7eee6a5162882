#include "nleik/io.hpp"

#include <unistd.h>

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nleik/config.hpp"
#include "nleik/errors.hpp"

namespace fs = std::filesystem;

namespace nleik {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'E', 'I', 'K', '0', '0', '1'};

template <class T>
void put_le(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("checkpoint truncated");
  char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void atomic_write(const std::string& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move '" + tmp + "' to '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

std::string csv_string(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw ContractError("csv_string: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const CsvTable& t) { atomic_write(path, csv_string(t)); }

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line, ',');
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw IoError("CSV line " + std::to_string(n) + ": expected " + std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || p != c.data() + c.size()) {
        throw IoError("CSV line " + std::to_string(n) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IoError("CSV has no header row");
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

PgmImage phase_image(const ScalarField& phase) {
  PgmImage img;
  img.width = phase.grid.nx();
  img.height = phase.grid.ny();
  img.pixels.resize(phase.values.size());
  for (std::size_t k = 0; k < phase.values.size(); ++k) {
    const double v = 0.5 * (std::sin(phase.values[k]) + 1.0);
    img.pixels[k] = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
  }
  return img;
}

std::string pgm_bytes(const PgmImage& img, PgmFormat fmt) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ContractError("pgm_bytes: pixel count does not match dimensions");
  }
  std::string out = (fmt == PgmFormat::P5 ? "P5\n" : "P2\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n" + std::to_string(img.maxval) + "\n";
  if (fmt == PgmFormat::P5) {
    for (std::uint16_t p : img.pixels) put_le<std::uint16_t>(out, p);
  } else {
    for (int j = 0; j < img.height; ++j) {
      for (int i = 0; i < img.width; ++i) {
        out += std::to_string(img.pixels[static_cast<std::size_t>(j) * img.width + i]);
        out += (i + 1 < img.width) ? " " : "\n";
      }
    }
  }
  return out;
}

void write_pgm(const std::string& path, const PgmImage& img, PgmFormat fmt) { atomic_write(path, pgm_bytes(img, fmt)); }

PgmImage parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_space();
    const std::size_t b = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (b == pos) throw IoError("PGM header truncated");
    return bytes.substr(b, pos - b);
  };
  auto number = [&] {
    const std::string t = token();
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw IoError("PGM: bad number '" + t + "'");
    return v;
  };
  const std::string magic = token();
  if (magic != "P2" && magic != "P5") throw IoError("not a PGM file (magic '" + magic + "')");
  PgmImage img;
  img.width = number();
  img.height = number();
  img.maxval = number();
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535) throw IoError("PGM: bad header");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (magic == "P5") {
    ++pos;  // single whitespace after maxval
    if (img.maxval < 256) {
      if (pos + n > bytes.size()) throw IoError("PGM: pixel data truncated");
      for (std::size_t k = 0; k < n; ++k) img.pixels[k] = static_cast<unsigned char>(bytes[pos + k]);
    } else {
      for (std::size_t k = 0; k < n; ++k) img.pixels[k] = get_le<std::uint16_t>(bytes, pos);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) img.pixels[k] = static_cast<std::uint16_t>(number());
  }
  return img;
}

PgmImage read_pgm(const std::string& path) { return parse_pgm(read_file(path)); }

std::string checkpoint_bytes(const SimState& s) {
  const Grid2D& g = s.phi.grid;
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny()));
  put_le<double>(out, g.lx());
  put_le<double>(out, g.ly());
  put_le<double>(out, s.t);
  for (double v : s.phi.values) put_le<double>(out, v);
  put_le<double>(out, s.drift);
  put_le<double>(out, s.qx);
  put_le<double>(out, s.qy);
  return out;
}

SimState parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const auto nx = get_le<std::uint32_t>(bytes, pos);
  const auto ny = get_le<std::uint32_t>(bytes, pos);
  const double lx = get_le<double>(bytes, pos);
  const double ly = get_le<double>(bytes, pos);
  SimState s;
  s.t = get_le<double>(bytes, pos);
  try {
    s.phi = ScalarField(Grid2D(static_cast<int>(nx), static_cast<int>(ny), lx, ly));
  } catch (const ContractError& e) {
    throw IoError(std::string("checkpoint header: ") + e.what());
  }
  for (double& v : s.phi.values) v = get_le<double>(bytes, pos);
  s.drift = get_le<double>(bytes, pos);
  s.qx = get_le<double>(bytes, pos);
  s.qy = get_le<double>(bytes, pos);
  if (pos != bytes.size()) throw IoError("checkpoint has trailing bytes");
  return s;
}

void write_checkpoint(const std::string& path, const SimState& s) { atomic_write(path, checkpoint_bytes(s)); }

SimState read_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void record_output(RunManifest& m, const std::string& dir, const std::string& relative) {
  const std::string bytes = read_file((fs::path(dir) / relative).string());
  m.outputs.push_back({relative, bytes.size(), sha256_hex(bytes)});
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["artifact_version"] = m.artifact_version;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& e : m.outputs) {
    j["outputs"].push_back({{"path", e.path}, {"size", e.size}, {"sha256", e.sha256}});
  }
  atomic_write((fs::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& dir) {
  const std::string text = read_file((fs::path(dir) / "manifest.json").string());
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& e : j.at("outputs")) {
      m.outputs.push_back({e.at("path").get<std::string>(), e.at("size").get<std::uint64_t>(),
                           e.at("sha256").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void verify_manifest(const std::string& dir, const RunManifest& m) {
  for (const auto& e : m.outputs) {
    const std::string path = (fs::path(dir) / e.path).string();
    std::string bytes;
    try {
      bytes = read_file(path);
    } catch (const IoError&) {
      throw IoError("manifest lists '" + e.path + "' but it is missing");
    }
    if (bytes.size() != e.size || sha256_hex(bytes) != e.sha256) {
      throw IoError("checksum mismatch for '" + e.path + "' against manifest");
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace nleik
