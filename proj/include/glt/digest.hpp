#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace glt {

/// BLAKE2b-256 of `data`, lowercase hex (64 chars). Used for transcript ids,
/// config fingerprints and log payload digests.
std::string content_digest(std::string_view data);

/// 64-bit FNV-1a. Stable across platforms; the mock backends derive their
/// output tokens from it.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

/// Standard alphabet with padding.
std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Standard alphabet, padding optional. nullopt on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace glt
