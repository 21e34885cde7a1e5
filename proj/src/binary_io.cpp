#include "regsum/binary_io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "regsum/error.hpp"

namespace regsum {

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? (c >> 1) ^ 0x82F63B78u : c >> 1;
    t[i] = c;
  }
  return t;
}

constexpr auto kCrcTable = make_crc_table();

}  // namespace

std::uint32_t crc32c(std::span<const std::byte> data, std::uint32_t crc) noexcept {
  crc = ~crc;
  for (std::byte b : data) {
    crc = kCrcTable[(crc ^ std::to_integer<std::uint32_t>(b)) & 0xFFu] ^ (crc >> 8);
  }
  return ~crc;
}

void ByteWriter::put(std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str16(std::string_view s) {
  if (s.size() > 0xFFFF) throw Error(ErrorCode::InvalidConfig, "string longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  const auto* p = reinterpret_cast<const std::byte*>(s.data());
  buf_.insert(buf_.end(), p, p + s.size());
}

void ByteWriter::patch_u32(std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.at(at + i) = static_cast<std::byte>((v >> (8 * i)) & 0xFFu);
}

void ByteReader::require(std::size_t n) const {
  if (n > remaining()) {
    throw Error(ErrorCode::TruncatedFile, "need " + std::to_string(n) + " bytes at offset " +
                                              std::to_string(pos_) + ", " + std::to_string(remaining()) +
                                              " left");
  }
}

std::uint64_t ByteReader::get(int n) {
  require(static_cast<std::size_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t{std::to_integer<std::uint8_t>(data_[pos_ + i])} << (8 * i);
  pos_ += n;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str16() {
  const std::size_t n = u16();
  auto b = bytes(n);
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

std::span<const std::byte> ByteReader::bytes(std::size_t n) {
  require(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

FileSource::FileSource(const std::string& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + path + ": " + std::strerror(errno));
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::IoError, "cannot stat " + path);
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
}

FileSource::~FileSource() {
  if (fd_ >= 0) ::close(fd_);
}

void FileSource::read_at(std::uint64_t offset, std::span<std::byte> out) const {
  if (offset > size_ || out.size() > size_ - offset) {
    throw Error(ErrorCode::TruncatedFile, path_ + ": read past end of file");
  }
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = ::pread(fd_, out.data() + done, out.size() - done,
                              static_cast<off_t>(offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::IoError, path_ + ": read failed");
    done += static_cast<std::size_t>(n);
  }
}

void MemorySource::read_at(std::uint64_t offset, std::span<std::byte> out) const {
  if (offset > data_.size() || out.size() > data_.size() - offset) {
    throw Error(ErrorCode::TruncatedFile, "read past end of buffer");
  }
  std::memcpy(out.data(), data_.data() + offset, out.size());
}

void CountingSource::read_at(std::uint64_t offset, std::span<std::byte> out) const {
  inner_->read_at(offset, out);
  bytes_ += out.size();
  ++calls_;
  if (record_) {
    std::lock_guard lock(mutex_);
    ranges_.push_back({offset, out.size()});
  }
}

std::vector<CountingSource::Range> CountingSource::ranges() const {
  std::lock_guard lock(mutex_);
  return ranges_;
}

void CountingSource::reset() {
  bytes_ = 0;
  calls_ = 0;
  std::lock_guard lock(mutex_);
  ranges_.clear();
}

std::vector<std::byte> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  const auto n = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> data(n);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n));
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  return data;
}

void write_file(const std::string& path, std::span<const std::byte> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

}  // namespace regsum
