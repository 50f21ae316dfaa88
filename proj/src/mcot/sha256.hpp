#pragma once

#include <cstdint>
#include <string>

namespace mcot {

// Lowercase hex SHA-256 digest of the input bytes.
std::string sha256_hex(const std::string& data);

// 64-bit FNV-1a, used for seed mixing (not security).
std::uint64_t fnv1a64(const std::string& data);

// splitmix64 step, used to scramble combined seeds.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace mcot
