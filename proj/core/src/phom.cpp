#include "parahom/phom.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace parahom {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::vector<unsigned char>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

constexpr std::size_t kHeader = 4 + 4 * 4;

}  // namespace

std::vector<unsigned char> encode_phom(const ScalarField& u) {
  const Lattice& lat = u.lattice();
  std::vector<unsigned char> out;
  out.reserve(kHeader + 8 * u.size());
  for (char c : {'P', 'H', 'O', 'M'}) out.push_back(static_cast<unsigned char>(c));
  put_u32(out, kPhomVersion);
  put_u32(out, static_cast<std::uint32_t>(lat.dim));
  put_u32(out, static_cast<std::uint32_t>(lat.n));
  put_u32(out, static_cast<std::uint32_t>(lat.n_t));
  for (double x : u.values()) put_f64(out, x);
  return out;
}

ScalarField decode_phom(const std::vector<unsigned char>& bytes, double length, std::optional<double> tau) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), "PHOM", 4) != 0)
    throw IoError("PHOM: bad magic or truncated header");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kPhomVersion) throw IoError("PHOM: unsupported version " + std::to_string(version));
  const auto d = static_cast<int>(get_u32(bytes.data() + 8));
  const auto n = static_cast<int>(get_u32(bytes.data() + 12));
  const auto n_t = static_cast<int>(get_u32(bytes.data() + 16));
  Lattice lat;
  try {
    lat = make_lattice(d, n, n_t, length, tau);
  } catch (const ConfigError& e) {
    throw IoError(std::string("PHOM: invalid lattice header: ") + e.what());
  }
  if (bytes.size() != kHeader + 8 * lat.sites()) throw IoError("PHOM: payload size does not match header");
  std::vector<double> v(lat.sites());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_f64(bytes.data() + kHeader + 8 * i);
  return ScalarField(lat, std::move(v));
}

void write_phom(const std::filesystem::path& path, const ScalarField& u) {
  const auto bytes = encode_phom(u);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

ScalarField read_phom(const std::filesystem::path& path, double length, std::optional<double> tau) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_phom(bytes, length, tau);
}

}  // namespace parahom
