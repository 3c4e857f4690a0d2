#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace tutorweb {

std::string sha256_hex(std::string_view data);

// Non-cryptographic; only used to mix ids into RNG seeds.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Fills `out` from the OS CSPRNG (OpenSSL RAND_bytes). Throws on failure.
void secure_random_bytes(std::span<std::uint8_t> out);

/// RFC 4648 base32, lower-case alphabet, no padding.
std::string base32_lower(std::span<const std::uint8_t> bytes);

}  // namespace tutorweb
