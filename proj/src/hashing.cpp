#include "symgen/hashing.hpp"

#include <array>
#include <cstdio>

#include <openssl/sha.h>

namespace symgen {

namespace {

std::array<unsigned char, SHA_DIGEST_LENGTH> digest(std::string_view data) {
  std::array<unsigned char, SHA_DIGEST_LENGTH> out{};
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
  return out;
}

}  // namespace

std::string sha1_hex(std::string_view data) {
  std::string hex;
  char buf[3];
  for (unsigned char b : digest(data)) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  return hex;
}

std::string git_blob_hash(std::string_view content) {
  std::string obj = "blob " + std::to_string(content.size());
  obj.push_back('\0');
  obj.append(content);
  return sha1_hex(obj);
}

std::uint64_t sha1_prefix64(std::string_view data) {
  const auto d = digest(data);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
  return v;
}

}  // namespace symgen
