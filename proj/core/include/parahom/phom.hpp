/// @file phom.hpp
/// @brief PHOM binary dump of a scalar field.
///
/// Layout: "PHOM", u32 version, u32 d, u32 n, u32 n_t, then n^d * n_t little-endian f64
/// in lattice index order.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "parahom/lattice.hpp"

namespace parahom {

inline constexpr std::uint32_t kPhomVersion = 1;

std::vector<unsigned char> encode_phom(const ScalarField& u);
// length/tau are not stored in the file; the caller supplies them (tau defaults to h^2).
ScalarField decode_phom(const std::vector<unsigned char>& bytes, double length,
                        std::optional<double> tau = std::nullopt);

void write_phom(const std::filesystem::path& path, const ScalarField& u);
ScalarField read_phom(const std::filesystem::path& path, double length, std::optional<double> tau = std::nullopt);

}  // namespace parahom
