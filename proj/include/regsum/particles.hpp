#pragma once

/**
 * @file particles.hpp
 * @brief Region tagging, sorting and offset indexing of tracer particles, and
 *        scan-free extraction by region selection.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regsum/grid.hpp"
#include "regsum/histogram.hpp"

namespace regsum {

class ParticleStoreReader;

struct ParticleRecord {
  std::uint64_t id = 0;
  Point3 pos{};
  /// One per tracked variable; stored as binary32 on disk.
  std::vector<float> values;

  friend bool operator==(const ParticleRecord&, const ParticleRecord&) = default;
};

/// Dense per-region (offset, count) into a region-sorted record array.
struct ParticleIndexTable {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint64_t> counts;

  std::size_t region_count() const noexcept { return counts.size(); }
  std::uint64_t total() const noexcept;
  /// Throws MalformedFile unless offsets chain from zero and sum to total.
  void validate(std::uint64_t total_records) const;

  friend bool operator==(const ParticleIndexTable&, const ParticleIndexTable&) = default;
};

struct SortedParticles {
  std::vector<ParticleRecord> records;
  ParticleIndexTable table;
  std::vector<ParticleRecord> out_of_domain;
};

/// Stable sort by containing region; particles outside the domain are kept
/// aside in out_of_domain and are not indexed.
SortedParticles sort_and_index(std::span<const ParticleRecord> particles, const RegionGrid& grid,
                               const RectilinearAxes& axes);

/// Closed value range on one tracked variable.
struct RefineRange {
  VarId var = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool admits(const ParticleRecord& p) const noexcept {
    if (var >= p.values.size()) return false;
    const double v = p.values[var];
    return v >= lo && v <= hi;
  }
};

/// Particles of the selected regions that pass every refine range. Only the
/// index tables and the selected regions' record ranges are read.
std::vector<ParticleRecord> extract(const ParticleStoreReader& store, std::size_t timestep,
                                    std::span<const RegionId> selection,
                                    std::span<const RefineRange> refine = {});

/// Header "id,x,y,z,<names...>" then one row per record. Positions use
/// 17 significant digits, values 9, so both round-trip exactly.
std::string records_to_csv(std::span<const ParticleRecord> records, std::span<const std::string> names);

}  // namespace regsum
