#pragma once

/**
 * @file query.hpp
 * @brief Post hoc engine over a loaded PDF store: predicate selection,
 *        selection merging, timeline statistics, slices and export.
 *
 * A Dataset is immutable once constructed; every query is a pure read and
 * may run concurrently with any other.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "regsum/histogram.hpp"
#include "regsum/store.hpp"

namespace regsum {

struct Predicate;

/// Regions whose fraction of mass with var in [lo, hi] is >= min_mass.
struct MassInRange {
  std::string var;
  double lo = 0.0;
  double hi = 0.0;
  double min_mass = 0.5;
};

/// Regions whose most populated bin (on var's axis) has its center in [lo, hi].
struct MaxBinIn {
  std::string var;
  double lo = 0.0;
  double hi = 0.0;
};

struct NonEmpty {};

struct And {
  std::vector<Predicate> args;
};

struct Or {
  std::vector<Predicate> args;
};

struct Not {
  std::shared_ptr<const Predicate> arg;
};

struct Predicate {
  std::variant<MassInRange, MaxBinIn, NonEmpty, And, Or, Not> node;
};

Predicate make_not(Predicate p);
Predicate make_and(std::vector<Predicate> args);
Predicate make_or(std::vector<Predicate> args);

/// Throws InvalidPredicate when a leaf has lo > hi or min_mass outside [0, 1],
/// or when And/Or have no operands.
void validate(const Predicate& p);

struct Selection {
  std::size_t timestep = 0;
  std::size_t config = 0;
  /// Ascending, unique.
  std::vector<RegionId> regions;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct AxisStats {
  std::string var;
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MergeResult {
  MergedPdf pdf;
  /// Exact per-axis moments from the summed retained sums; empty entries
  /// (count 0) carry zeros.
  std::vector<AxisStats> stats;
};

struct TimelineEntry {
  std::size_t timestep = 0;
  double time = 0.0;
  std::uint64_t count = 0;
  /// Absent when no samples were recorded at this timestep.
  std::optional<double> mean;
};

struct Thumbnail {
  RegionId region;
  std::uint32_t col = 0;
  std::uint32_t row = 0;
  /// Per axis, nbins + 1 edges after rebinning; the last bin may be narrower
  /// when the bin count is not a multiple of the level of detail.
  std::vector<std::vector<double>> bin_edges;
  std::vector<std::uint32_t> nbins;
  std::vector<std::uint64_t> counts;
  std::uint64_t sample_count = 0;
};

struct SliceView {
  Axis axis = Axis::Z;
  std::uint32_t index = 0;
  std::uint32_t lod = 1;
  Axis horizontal = Axis::X;
  Axis vertical = Axis::Y;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  /// Row-major, horizontal index fastest.
  std::vector<Thumbnail> thumbnails;
};

/// Sums groups of lod adjacent bins (per axis in 2D); the last group may be
/// short. Total mass is preserved exactly.
std::vector<std::uint64_t> rebin_counts(std::span<const std::uint64_t> counts,
                                        std::span<const std::uint32_t> nbins, std::uint32_t lod);

class Dataset {
 public:
  explicit Dataset(PdfStore store);
  static Dataset load(const std::string& path);

  const PdfStore& store() const noexcept { return store_; }
  const PdfStoreMetadata& meta() const noexcept { return store_.meta; }
  const RegionGrid& grid() const noexcept { return store_.meta.grid; }
  std::size_t timestep_count() const noexcept { return store_.timesteps.size(); }

  /// Throws UnknownTimestep, InvalidConfig or UnknownRegion.
  const RegionalHistogram& histogram(std::size_t t, std::size_t config, RegionId r) const;

  /// Throws UnknownVariable when a leaf variable is not an axis of the config.
  Selection evaluate(std::size_t t, std::size_t config, const Predicate& p) const;

  /// Throws EmptySelection for an empty region list.
  MergeResult merge_selection(const Selection& sel) const;

  /// Mean of var per timestep, from the first unconditioned config that bins
  /// var (or the first conditioned one otherwise). Throws UnknownVariable.
  std::vector<TimelineEntry> timeline(std::string_view var) const;

  /// Throws IndexOutOfRange for a plane outside the region grid or lod == 0.
  SliceView slice(std::size_t t, std::size_t config, Axis axis, std::uint32_t index,
                  std::uint32_t lod) const;

  /// Axis of var within config, or UnknownVariable.
  std::size_t axis_of(std::size_t config, std::string_view var) const;

 private:
  void check_key(std::size_t t, std::size_t config) const;
  std::vector<char> eval_mask(std::size_t t, std::size_t config, const Predicate& p) const;

  struct AxisTotals {
    double sum = 0.0;
    std::uint64_t count = 0;
  };

  PdfStore store_;
  /// [config][axis][timestep] sums over all regions, computed at load.
  std::vector<std::vector<std::vector<AxisTotals>>> totals_;
};

enum class ExportFormat { Csv, Json };

/// 1D rows: bin_lo,bin_hi,count,probability. 2D rows add the second axis:
/// bin0_lo,bin0_hi,bin1_lo,bin1_hi,count,probability.
std::string export_csv(const MergedPdf& m);
std::string export_json(const MergedPdf& m);
std::string export_merged(const MergedPdf& m, ExportFormat format);
/// Inverse of export_json.
MergedPdf merged_from_json(std::string_view text);

}  // namespace regsum
