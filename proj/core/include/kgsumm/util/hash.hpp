#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace kgsumm::util {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t file_digest(const std::filesystem::path& path);
// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

}  // namespace kgsumm::util
