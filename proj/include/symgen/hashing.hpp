#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace symgen {

/// Lowercase hex SHA-1 digest.
std::string sha1_hex(std::string_view data);
/// Git blob object id: sha1("blob <size>\0" + content).
std::string git_blob_hash(std::string_view content);
/// First 8 digest bytes of sha1(data), big-endian.
std::uint64_t sha1_prefix64(std::string_view data);

}  // namespace symgen
