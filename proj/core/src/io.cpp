#include "qstomo/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qstomo/errors.hpp"

namespace qstomo::io {

std::string config_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing", tmp);
    f << text;
    if (!f) throw IoError("write failed", tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed", path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading", path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

bool exists(const std::string& path) { return std::filesystem::exists(path); }

void ensure_dir(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory", path);
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("corrupt JSON (") + e.what() + ")", path);
  }
}

namespace {

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffULL) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_f64(const std::string& path, const std::vector<double>& values) {
  std::string buf(values.size() * 8, '\0');
  for (size_t i = 0; i < values.size(); ++i) {
    std::uint64_t u;
    std::memcpy(&u, &values[i], 8);
    u = to_le(u);
    std::memcpy(&buf[i * 8], &u, 8);
  }
  write_text(path, buf);
}

std::vector<double> read_f64(const std::string& path) {
  const std::string buf = read_text(path);
  if (buf.size() % 8 != 0) throw IoError("binary size is not a multiple of 8 bytes", path);
  std::vector<double> out(buf.size() / 8);
  for (size_t i = 0; i < out.size(); ++i) {
    std::uint64_t u;
    std::memcpy(&u, &buf[i * 8], 8);
    u = to_le(u);
    std::memcpy(&out[i], &u, 8);
  }
  return out;
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace qstomo::io
