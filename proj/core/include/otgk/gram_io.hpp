#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "otgk/kernels.hpp"

namespace otgk {

// CSV layout:
//   # method=<m>;key=value;...;repaired=<r>[;min_eigenvalue=<x>]
//   N rows of N comma-separated values, 17 significant digits.
void write_gram_csv(const GramMatrix& gram, const std::filesystem::path& path);
GramMatrix read_gram_csv(const std::filesystem::path& path);

// Binary cache layout, little-endian:
//   "OTGKGRAM" | u32 version | u64 key | u32 method | u32 repaired
//   | u32 #params | (u32 len, bytes) x 2 per param | u64 N | N*N f64
//   | u64 FNV-1a of everything before it
// `key` identifies the producing configuration.
void write_gram_binary(const GramMatrix& gram, std::uint64_t key,
                       const std::filesystem::path& path);

// nullopt when the file is missing, truncated, fails its checksum or was
// written for a different key.
std::optional<GramMatrix> read_gram_binary(const std::filesystem::path& path,
                                           std::uint64_t expected_key);

}  // namespace otgk
