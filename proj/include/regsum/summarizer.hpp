#pragma once

/**
 * @file summarizer.hpp
 * @brief Streaming per-region PDF computation over field blocks.
 *
 * Each region is summarized in two passes over its admitted samples: the
 * first gathers VariableStats (and exact quartiles for Freedman-Diaconis),
 * the second bins against edges derived from those stats. Edges are per
 * region and per timestep.
 *
 * Blocks must be aligned with region boundaries so that every region is
 * summarized from one block. The cells of a region are always visited in the
 * same x-fastest order, which makes the result independent of the tiling.
 */

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "regsum/grid.hpp"
#include "regsum/histogram.hpp"

namespace regsum {

/// Inclusive on both ends.
struct Condition {
  VarId var = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool admits(double v) const noexcept { return v >= lo && v <= hi; }
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct PdfConfig {
  std::vector<VarId> var_ids;
  BinningStrategy strategy;
  std::optional<Condition> condition;

  std::size_t ndims() const noexcept { return var_ids.size(); }
  /// Throws InvalidConfig on arity, duplicate-variable or condition-bound errors.
  void validate() const;

  friend bool operator==(const PdfConfig&, const PdfConfig&) = default;
};

/// A box of grid points with dense x-fastest values for every variable.
struct FieldBlock {
  std::array<Extent, 3> extents{};
  std::vector<std::vector<double>> values;

  std::size_t size() const noexcept {
    return std::size_t{extents[0].size()} * extents[1].size() * extents[2].size();
  }
  std::size_t local_index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const noexcept {
    return (x - extents[0].lo) +
           std::size_t{extents[0].size()} * ((y - extents[1].lo) + std::size_t{extents[1].size()} * (z - extents[2].lo));
  }
};

struct RegionSummary {
  RegionId region;
  std::vector<RegionalHistogram> per_config;

  friend bool operator==(const RegionSummary&, const RegionSummary&) = default;
};

/// Regions ascending by id; a full summary holds every region of the grid,
/// a fragment only some.
struct TimestepSummary {
  double time = 0.0;
  std::vector<RegionSummary> regions;

  const RegionalHistogram& at(RegionId r, std::size_t config) const;

  friend bool operator==(const TimestepSummary&, const TimestepSummary&) = default;
};

/// Two-pass histogram of one region box under one config.
RegionalHistogram summarize_region(const FieldBlock& block, const std::array<Extent, 3>& box,
                                   const PdfConfig& config);

/// Summary fragment covering the regions inside one block. Throws
/// BlockMisaligned when a region straddles the block boundary.
TimestepSummary summarize_block(double time, const FieldBlock& block, const RegionGrid& grid,
                                std::span<const PdfConfig> configs);

/// Throws IncompleteTiling unless the blocks cover the grid exactly once,
/// then BlockMisaligned / UnknownVariable as for summarize_block.
TimestepSummary summarize_timestep(double time, std::span<const FieldBlock> blocks,
                                   const RegionGrid& grid, std::span<const PdfConfig> configs);

/// Region-wise union of fragments. Regions present in several fragments are
/// combined with add_same_edges in a canonical order, so the result does not
/// depend on the order of parts.
TimestepSummary merge_partials(std::span<const TimestepSummary> parts);

/// Extents of block_counts region-aligned blocks, x-fastest. Throws
/// InvalidDecomposition when a block count exceeds the region count.
std::vector<std::array<Extent, 3>> aligned_blocks(const RegionGrid& grid, const Index3& block_counts);

/// Splits a whole-volume block into block_counts region-aligned blocks.
std::vector<FieldBlock> split_aligned(const FieldBlock& whole, const RegionGrid& grid,
                                      const Index3& block_counts);

}  // namespace regsum
