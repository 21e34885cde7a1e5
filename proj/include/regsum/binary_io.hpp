#pragma once

/**
 * @file binary_io.hpp
 * @brief Little-endian encoding, CRC32C, and positional byte sources.
 */

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regsum {

/// CRC-32C (Castagnoli, reflected polynomial 0x82F63B78).
std::uint32_t crc32c(std::span<const std::byte> data, std::uint32_t crc = 0) noexcept;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { put(v, 1); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v);
  void f64(double v);
  void bytes(std::span<const std::byte> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  /// u16 length prefix followed by the raw bytes.
  void str16(std::string_view s);

  void patch_u32(std::size_t at, std::uint32_t v);

  std::size_t size() const noexcept { return buf_.size(); }
  std::span<const std::byte> view() const noexcept { return buf_; }
  std::span<const std::byte> view(std::size_t from) const noexcept {
    return std::span<const std::byte>(buf_).subspan(from);
  }
  std::vector<std::byte> take() && { return std::move(buf_); }
  void clear() noexcept { buf_.clear(); }

 private:
  void put(std::uint64_t v, int n);
  std::vector<std::byte> buf_;
};

/// Bounds-checked cursor; running past the end throws TruncatedFile.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32();
  double f64();
  std::string str16();
  std::span<const std::byte> bytes(std::size_t n);

  /// Throws TruncatedFile unless n more bytes are available.
  void require(std::size_t n) const;

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::span<const std::byte> consumed_since(std::size_t from) const noexcept {
    return data_.subspan(from, pos_ - from);
  }

 private:
  std::uint64_t get(int n);
  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
};

/// Positional, cursor-free reads; safe to share between threads.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::uint64_t size() const = 0;
  /// Fills out from offset; throws TruncatedFile when the range passes the end.
  virtual void read_at(std::uint64_t offset, std::span<std::byte> out) const = 0;
};

class FileSource final : public ByteSource {
 public:
  /// Throws IoError when the file cannot be opened.
  explicit FileSource(const std::string& path);
  ~FileSource() override;
  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  std::uint64_t size() const override { return size_; }
  void read_at(std::uint64_t offset, std::span<std::byte> out) const override;

 private:
  int fd_ = -1;
  std::uint64_t size_ = 0;
  std::string path_;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(std::vector<std::byte> data) : data_(std::move(data)) {}
  std::uint64_t size() const override { return data_.size(); }
  void read_at(std::uint64_t offset, std::span<std::byte> out) const override;

 private:
  std::vector<std::byte> data_;
};

/// Wraps another source and tallies every byte requested from it; used to
/// check how much of a file a query actually touches.
class CountingSource final : public ByteSource {
 public:
  struct Range {
    std::uint64_t offset;
    std::uint64_t length;
  };

  explicit CountingSource(std::shared_ptr<const ByteSource> inner, bool record_ranges = false)
      : inner_(std::move(inner)), record_(record_ranges) {}

  std::uint64_t size() const override { return inner_->size(); }
  void read_at(std::uint64_t offset, std::span<std::byte> out) const override;

  std::uint64_t bytes_read() const noexcept { return bytes_.load(); }
  std::uint64_t read_calls() const noexcept { return calls_.load(); }
  std::vector<Range> ranges() const;
  void reset();

 private:
  std::shared_ptr<const ByteSource> inner_;
  bool record_;
  mutable std::atomic<std::uint64_t> bytes_{0};
  mutable std::atomic<std::uint64_t> calls_{0};
  mutable std::vector<Range> ranges_;
  mutable std::mutex mutex_;
};

std::vector<std::byte> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> data);

}  // namespace regsum
