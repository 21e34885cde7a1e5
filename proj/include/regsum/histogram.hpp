#pragma once

/**
 * @file histogram.hpp
 * @brief Regional histograms: bin selection, accumulation, reduction, queries
 *        and merging across heterogeneous bin edges.
 *
 * Bins are uniform over [min, max]. Every bin is half-open except the last,
 * which is closed so that the maximum sample of a region lands inside. The
 * lower edge of bin i is min + i * width and the upper edge of the last bin
 * is exactly max; bin lookup is defined against those edge values, so any
 * linear scan over the same edges yields the same bin.
 *
 * Samples are never rejected: out-of-range and non-finite samples are tallied
 * in separate counters so coverage loss stays observable.
 */

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace regsum {

using VarId = std::uint16_t;

struct BinEdges {
  double min = 0.0;
  double max = 1.0;
  std::uint32_t nbins = 1;

  /// Validated construction; throws InvalidEdges when min >= max, nbins == 0
  /// or the width is not finite and positive.
  static BinEdges make(double min, double max, std::uint32_t nbins);

  double width() const noexcept { return (max - min) / nbins; }
  double lower(std::uint32_t i) const noexcept { return i == 0 ? min : (i >= nbins ? max : min + i * width()); }
  double upper(std::uint32_t i) const noexcept { return lower(i + 1); }
  double center(std::uint32_t i) const noexcept { return 0.5 * (lower(i) + upper(i)); }

  /// Bin containing x, or empty when x is outside [min, max] or not finite.
  std::optional<std::uint32_t> bin_of(double x) const noexcept;

  friend bool operator==(const BinEdges&, const BinEdges&) = default;
};

/// Running count/min/max/sum/sum-of-squares. The retained sums make the
/// mean and population variance exact with respect to the samples, whatever
/// the binning.
struct VariableStats {
  std::uint64_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::optional<double> q1;
  std::optional<double> q3;

  // Rounding residuals of sum and sum_sq (true value = field + residual).
  // Kept in memory only; they never reach a file and do not affect equality.
  double sum_residual = 0.0;
  double sum_sq_residual = 0.0;

  void add(double x) noexcept;
  bool empty() const noexcept { return count == 0; }
  double mean() const noexcept { return sum / static_cast<double>(count); }
  /// Population variance, clamped at zero.
  double variance() const noexcept;

  friend bool operator==(const VariableStats& a, const VariableStats& b) noexcept {
    return a.count == b.count && a.min == b.min && a.max == b.max && a.sum == b.sum && a.sum_sq == b.sum_sq &&
           a.q1 == b.q1 && a.q3 == b.q3;
  }
};

/// Exact combination; quartiles do not survive a merge.
VariableStats combine(const VariableStats& a, const VariableStats& b) noexcept;

/// Stats of a sample list, summed in the given order. With quartiles=true,
/// q1/q3 are exact (linear interpolation between order statistics).
VariableStats compute_stats(std::span<const double> samples, bool quartiles);

/// Quantile of an ascending sorted sample using linear interpolation between
/// order statistics at position p * (n - 1).
double quantile_sorted(std::span<const double> sorted, double p);

enum class Strategy : std::uint8_t {
  Sturges = 0,
  Scott = 1,
  FreedmanDiaconis = 2,
  Fixed = 3,
};

/// For Fixed, max_bins is the bin count itself.
struct BinningStrategy {
  Strategy kind = Strategy::FreedmanDiaconis;
  std::uint32_t max_bins = 64;

  static BinningStrategy sturges(std::uint32_t max_bins = 64) { return {Strategy::Sturges, max_bins}; }
  static BinningStrategy scott(std::uint32_t max_bins = 64) { return {Strategy::Scott, max_bins}; }
  static BinningStrategy freedman_diaconis(std::uint32_t max_bins = 64) {
    return {Strategy::FreedmanDiaconis, max_bins};
  }
  static BinningStrategy fixed(std::uint32_t nbins) { return {Strategy::Fixed, nbins}; }

  friend bool operator==(const BinningStrategy&, const BinningStrategy&) = default;
};

/// Sturges bin count: ceil(log2 n) + 1.
std::uint32_t sturges_bins(std::uint64_t n);
/// Scott width: 3.49 s n^(-1/3), s the population standard deviation.
double scott_width(const VariableStats& stats);
/// Freedman-Diaconis width: 2 IQR n^(-1/3). Throws MissingQuartiles.
double freedman_diaconis_width(const VariableStats& stats);

/// Edges over [stats.min, stats.max]. A zero-width range becomes a single bin
/// over [min, min + eps], eps = max(|min| 1e-9, 1e-12). A zero or non-finite
/// width from Scott/FD saturates at max_bins.
BinEdges edges_from_strategy(const VariableStats& stats, const BinningStrategy& strategy);

struct RegionalHistogram {
  std::vector<VarId> var_ids;
  std::vector<BinEdges> edges;
  /// Axis-0 fastest in 2D.
  std::vector<std::uint64_t> counts;
  std::uint64_t out_of_range = 0;
  std::uint64_t invalid = 0;
  std::uint64_t sample_count = 0;
  /// Per axis, over in-range samples.
  std::vector<VariableStats> stats;

  RegionalHistogram() = default;
  explicit RegionalHistogram(VarId var, const BinEdges& e);
  RegionalHistogram(VarId var0, VarId var1, const BinEdges& e0, const BinEdges& e1);

  std::size_t ndims() const noexcept { return edges.size(); }
  std::uint64_t offered() const noexcept { return sample_count + out_of_range + invalid; }

  void accumulate(double x);
  void accumulate(double x, double y);
  /// Arity must equal ndims().
  void accumulate(std::span<const double> sample);

  friend bool operator==(const RegionalHistogram&, const RegionalHistogram&) = default;
};

/// Histogram with real-valued counts, the result of merging regions whose
/// edges may differ.
struct MergedPdf {
  std::vector<VarId> var_ids;
  std::vector<BinEdges> edges;
  std::vector<double> counts;
  std::uint64_t out_of_range = 0;
  std::uint64_t invalid = 0;
  std::uint64_t sample_count = 0;
  std::vector<VariableStats> stats;
  std::uint64_t source_region_count = 0;

  std::size_t ndims() const noexcept { return edges.size(); }
  double total_mass() const noexcept;

  friend bool operator==(const MergedPdf&, const MergedPdf&) = default;
};

/// Element-wise sum; throws EdgesMismatch unless ndims, var_ids and edges agree.
RegionalHistogram add_same_edges(const RegionalHistogram& a, const RegionalHistogram& b);

/// Fraction of the sample mass with axis value in [lo, hi], prorating partial
/// bins by overlap width (uniform within a bin). 2D histograms are
/// marginalized over the other axis first.
double mass_in_range(const RegionalHistogram& h, std::size_t axis, double lo, double hi);
double mass_in_range(const MergedPdf& m, std::size_t axis, double lo, double hi);

enum class MomentMode { Exact, Binned };

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const RegionalHistogram& h, std::size_t axis, MomentMode mode);
Moments moments(const MergedPdf& m, std::size_t axis, MomentMode mode);

/// Optional closed value window per axis for max_bin.
using AxisWindow = std::optional<std::pair<double, double>>;

struct MaxBin {
  std::uint64_t linear_index = 0;
  std::array<std::uint32_t, 2> index{};
  double count = 0.0;
  std::vector<std::pair<double, double>> ranges;
};

/// Highest-count bin among those whose centers fall inside the windows; ties
/// go to the lowest linear index.
MaxBin max_bin(const RegionalHistogram& h, std::span<const AxisWindow> windows = {});

/// Merges onto edges spanning the union range with the finest input
/// resolution. Counts are redistributed by interval overlap; inputs that all
/// share edges are summed exactly instead. Retained sums are combined so the
/// exact moments of the result stay exact.
MergedPdf merge_general(std::span<const RegionalHistogram> hs);
MergedPdf merge_general(std::span<const RegionalHistogram* const> hs);

MergedPdf to_merged(const RegionalHistogram& h);

/// h's counts spread over the target edges by interval overlap. Source mass
/// outside the target range lands in the nearest overlapping bins.
MergedPdf redistribute(const RegionalHistogram& h, std::span<const BinEdges> target);

}  // namespace regsum
