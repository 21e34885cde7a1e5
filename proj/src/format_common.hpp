#pragma once

#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "regsum/binary_io.hpp"
#include "regsum/error.hpp"
#include "regsum/store.hpp"

namespace regsum::detail {

using Magic = char[4];

inline void put_magic(ByteWriter& w, const Magic& magic) {
  for (char c : magic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kFormatVersion);
}

/// Checks magic then version.
inline void expect_magic(ByteReader& r, const Magic& magic) {
  auto b = r.bytes(4);
  if (std::memcmp(b.data(), magic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, std::string("expected ") + std::string(magic, 4));
  }
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
}

void encode_variables(ByteWriter& w, std::span<const VariableInfo> vars);
std::vector<VariableInfo> decode_variables(ByteReader& r);

/// Reads [offset, offset + n) of a source into a fresh buffer.
inline std::vector<std::byte> read_range(const ByteSource& src, std::uint64_t offset, std::uint64_t n) {
  if (offset > src.size() || n > src.size() - offset) {
    throw Error(ErrorCode::TruncatedFile, "range passes the end of the file");
  }
  std::vector<std::byte> buf(static_cast<std::size_t>(n));
  src.read_at(offset, buf);
  return buf;
}

}  // namespace regsum::detail
