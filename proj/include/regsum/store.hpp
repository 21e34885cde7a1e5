#pragma once

/**
 * @file store.hpp
 * @brief On-disk formats: the PDF store (RPDF), the region-sorted particle
 *        store (RPRT) and the raw field input (RFLD).
 *
 * All integers are little-endian and all reals binary64 unless noted. The
 * byte layout of each format is documented in docs/formats.md. RPDF and RPRT
 * end every timestep with a CRC32C over that timestep's bytes.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regsum/binary_io.hpp"
#include "regsum/grid.hpp"
#include "regsum/particles.hpp"
#include "regsum/summarizer.hpp"

namespace regsum {

inline constexpr std::uint32_t kFormatVersion = 1;

struct VariableInfo {
  std::string name;
  std::string unit;

  friend bool operator==(const VariableInfo&, const VariableInfo&) = default;
};

/// Index of the variable called name, if any.
std::optional<VarId> find_variable(std::span<const VariableInfo> vars, std::string_view name);

// ---------------------------------------------------------------------------
// PDF store

struct PdfStoreMetadata {
  RegionGrid grid;
  std::vector<VariableInfo> variables;
  std::vector<PdfConfig> configs;

  friend bool operator==(const PdfStoreMetadata&, const PdfStoreMetadata&) = default;
};

struct PdfStore {
  PdfStoreMetadata meta;
  std::vector<TimestepSummary> timesteps;

  friend bool operator==(const PdfStore&, const PdfStore&) = default;
};

std::vector<std::byte> encode_pdf_store(const PdfStore& store);
/// Throws BadMagic, UnsupportedVersion, TruncatedFile, ChecksumMismatch or
/// MalformedFile.
PdfStore decode_pdf_store(std::span<const std::byte> bytes);

void write_pdf_store(const std::string& path, const PdfStore& store);
PdfStore read_pdf_store(const std::string& path);

/// Streams timesteps to disk one at a time; the timestep count in the header
/// is patched by finish().
class PdfStoreWriter {
 public:
  PdfStoreWriter(const std::string& path, PdfStoreMetadata meta);
  ~PdfStoreWriter();
  PdfStoreWriter(const PdfStoreWriter&) = delete;
  PdfStoreWriter& operator=(const PdfStoreWriter&) = delete;

  void append(const TimestepSummary& summary);
  void finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Particle store

/// Bytes per record: id u64, position 3 x f64, values V x f32.
constexpr std::uint64_t particle_record_size(std::size_t nvars) noexcept { return 8 + 3 * 8 + 4 * nvars; }

struct ParticleStoreHeader {
  Index3 region_counts{};
  std::vector<VariableInfo> variables;

  std::uint32_t region_count() const noexcept {
    return region_counts[0] * region_counts[1] * region_counts[2];
  }
  friend bool operator==(const ParticleStoreHeader&, const ParticleStoreHeader&) = default;
};

struct ParticleTimestep {
  double time = 0.0;
  std::vector<ParticleRecord> records;
  ParticleIndexTable table;

  friend bool operator==(const ParticleTimestep&, const ParticleTimestep&) = default;
};

struct ParticleStore {
  ParticleStoreHeader header;
  std::vector<ParticleTimestep> timesteps;

  friend bool operator==(const ParticleStore&, const ParticleStore&) = default;
};

std::vector<std::byte> encode_particle_store(const ParticleStore& store);
/// Full read with checksum verification.
ParticleStore decode_particle_store(std::span<const std::byte> bytes);
void write_particle_store(const std::string& path, const ParticleStore& store);
ParticleStore read_particle_store(const std::string& path);

class ParticleStoreWriter {
 public:
  ParticleStoreWriter(const std::string& path, ParticleStoreHeader header);
  ~ParticleStoreWriter();
  ParticleStoreWriter(const ParticleStoreWriter&) = delete;
  ParticleStoreWriter& operator=(const ParticleStoreWriter&) = delete;

  /// Records must already be sorted consistently with the table.
  void append(double time, std::span<const ParticleRecord> records, const ParticleIndexTable& table);
  void finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Random-access reader. Opening walks the header and the per-timestep index
/// tables only; region reads then touch exactly that region's record bytes.
class ParticleStoreReader {
 public:
  explicit ParticleStoreReader(std::shared_ptr<const ByteSource> source);
  static ParticleStoreReader open(const std::string& path);

  const ParticleStoreHeader& header() const noexcept { return header_; }
  std::uint32_t region_count() const noexcept { return header_.region_count(); }
  std::size_t timestep_count() const noexcept { return steps_.size(); }
  std::uint64_t record_size() const noexcept { return particle_record_size(header_.variables.size()); }
  /// Bytes consumed while opening (header plus index tables).
  std::uint64_t index_bytes() const noexcept { return index_bytes_; }

  double time(std::size_t t) const;
  const ParticleIndexTable& table(std::size_t t) const;
  /// Absolute file offset of the first record of timestep t.
  std::uint64_t records_base(std::size_t t) const;

  /// Throws UnknownTimestep, UnknownRegion or TruncatedFile.
  std::vector<ParticleRecord> read_region(std::size_t t, RegionId r) const;
  /// Reads the whole timestep and checks its CRC (ChecksumMismatch).
  ParticleTimestep read_timestep(std::size_t t) const;

 private:
  struct Step {
    double time = 0.0;
    std::uint64_t start = 0;
    std::uint64_t records_base = 0;
    std::uint64_t nrecords = 0;
    ParticleIndexTable table;
  };
  const Step& step(std::size_t t) const;

  std::shared_ptr<const ByteSource> source_;
  ParticleStoreHeader header_;
  std::vector<Step> steps_;
  std::uint64_t index_bytes_ = 0;
};

std::vector<ParticleRecord> read_region_particles(const std::string& path, std::size_t timestep,
                                                  RegionId region);

ParticleRecord decode_particle_record(std::span<const std::byte> bytes, std::size_t nvars);

// ---------------------------------------------------------------------------
// Raw field input

struct RawFieldHeader {
  RectilinearAxes axes;
  std::vector<VariableInfo> variables;
  std::uint32_t timesteps = 0;

  Index3 dims() const noexcept { return axes.dims(); }
  std::uint64_t cells() const noexcept {
    const auto d = dims();
    return std::uint64_t{d[0]} * d[1] * d[2];
  }
};

class RawFieldWriter {
 public:
  RawFieldWriter(const std::string& path, const RectilinearAxes& axes, std::vector<VariableInfo> variables);
  ~RawFieldWriter();
  RawFieldWriter(const RawFieldWriter&) = delete;
  RawFieldWriter& operator=(const RawFieldWriter&) = delete;

  /// values[v] is variable v's dense x-fastest array.
  void append(double time, std::span<const std::vector<double>> values);
  void finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class RawFieldReader {
 public:
  explicit RawFieldReader(std::shared_ptr<const ByteSource> source);
  static RawFieldReader open(const std::string& path);

  const RawFieldHeader& header() const noexcept { return header_; }
  double time(std::size_t t) const;
  /// Whole-volume block.
  FieldBlock read_timestep(std::size_t t) const;
  /// Sub-box of one timestep, read row by row.
  FieldBlock read_block(std::size_t t, const std::array<Extent, 3>& extents) const;

 private:
  std::uint64_t step_offset(std::size_t t) const;

  std::shared_ptr<const ByteSource> source_;
  RawFieldHeader header_;
  std::uint64_t data_start_ = 0;
};

}  // namespace regsum
