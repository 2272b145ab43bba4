// Run directory: atomic file writes, checksums and the completion manifest.
#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace parahom::cli {

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes);
std::string format_double(double x);  // shortest round-trip text
std::string read_file(const std::string& path);

// CSV with a fixed header; numbers are written with format_double.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row();
  Csv& operator<<(double x);
  Csv& operator<<(int x);
  Csv& operator<<(long long x);
  Csv& operator<<(std::uint64_t x);
  Csv& operator<<(const std::string& s);
  Csv& operator<<(bool b);
  std::string str() const;

 private:
  std::string text_;
  bool fresh_ = true;
};

class RunWriter {
 public:
  RunWriter(std::string dir, std::string command);
  const std::string& dir() const noexcept { return dir_; }
  // writes dir/name via a temporary file and rename; records its checksum
  void write(const std::string& name, const std::string& bytes);
  void write_json(const std::string& name, const nlohmann::ordered_json& j);
  // manifest.json goes last
  void finish(const std::string& config_hash, std::uint64_t seed, const std::string& status);

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  std::string dir_;
  std::string command_;
  std::vector<Entry> files_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace parahom::cli
