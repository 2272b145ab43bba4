#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace parahom::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoFailure("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Csv::Csv(std::vector<std::string> header) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

Csv& Csv::row() {
  if (!fresh_) text_ += "\n";
  fresh_ = true;
  return *this;
}

Csv& Csv::operator<<(const std::string& s) {
  if (!fresh_) text_ += ",";
  text_ += s;
  fresh_ = false;
  return *this;
}
Csv& Csv::operator<<(double x) { return *this << format_double(x); }
Csv& Csv::operator<<(int x) { return *this << std::to_string(x); }
Csv& Csv::operator<<(long long x) { return *this << std::to_string(x); }
Csv& Csv::operator<<(std::uint64_t x) { return *this << std::to_string(x); }
Csv& Csv::operator<<(bool b) { return *this << std::string(b ? "1" : "0"); }

std::string Csv::str() const { return fresh_ ? text_ : text_ + "\n"; }

RunWriter::RunWriter(std::string dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoFailure("cannot create output directory " + dir_);
  // a stale manifest would mark an unfinished run as complete
  fs::remove(fs::path(dir_) / "manifest.json", ec);
}

void RunWriter::write(const std::string& name, const std::string& bytes) {
  const fs::path target = fs::path(dir_) / name;
  const fs::path tmp = fs::path(dir_) / ("." + name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoFailure("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoFailure("cannot rename into " + target.string() + ": " + ec.message());
  for (Entry& e : files_)
    if (e.name == name) {
      e.sha256 = sha256_hex(bytes);
      e.bytes = bytes.size();
      return;
    }
  files_.push_back(Entry{name, sha256_hex(bytes), bytes.size()});
}

void RunWriter::write_json(const std::string& name, const nlohmann::ordered_json& j) { write(name, j.dump(2) + "\n"); }

void RunWriter::finish(const std::string& config_hash, std::uint64_t seed, const std::string& status) {
  nlohmann::ordered_json m;
  m["tool"] = "parahom";
  m["version"] = PARAHOM_VERSION;
  m["command"] = command_;
  m["status"] = status;
  m["config_sha256"] = config_hash;
  m["seed"] = seed;
  m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  m["files"] = nlohmann::ordered_json::array();
  for (const Entry& e : files_) m["files"].push_back({{"name", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  write("manifest.json", m.dump(2) + "\n");
}

}  // namespace parahom::cli
