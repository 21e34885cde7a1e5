#pragma once

/**
 * @file grid.hpp
 * @brief Rectilinear grid, region decomposition and region addressing.
 *
 * A RegionGrid partitions the grid points of a dims[0] x dims[1] x dims[2]
 * volume into axis-aligned boxes. Per axis the split is balanced: the first
 * (dims mod count) extents are one point longer than the rest. Region ids are
 * linearized x-fastest:
 *
 * @code
 * id = ix + Rx * (iy + Ry * iz)
 * @endcode
 *
 * The particle index and the PDF store both depend on this ordering.
 */

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace regsum {

using Index3 = std::array<std::uint32_t, 3>;
using Point3 = std::array<double, 3>;

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

/// Half-open index range [lo, hi).
struct Extent {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  std::uint32_t size() const noexcept { return hi - lo; }
  bool contains(std::uint32_t i) const noexcept { return i >= lo && i < hi; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct RegionId {
  std::uint32_t value = 0;

  friend auto operator<=>(const RegionId&, const RegionId&) = default;
};

/// Point coordinates of a non-uniform rectilinear grid, one array per axis.
class RectilinearAxes {
 public:
  RectilinearAxes() = default;
  /// Throws InvalidAxes unless every array has >= 2 strictly increasing entries.
  RectilinearAxes(std::vector<double> x, std::vector<double> y, std::vector<double> z);

  static RectilinearAxes uniform(const Index3& dims, const Point3& lo, const Point3& hi);

  std::span<const double> coords(std::size_t axis) const noexcept { return coords_[axis]; }
  Index3 dims() const noexcept;
  double lo(std::size_t axis) const noexcept { return coords_[axis].front(); }
  double hi(std::size_t axis) const noexcept { return coords_[axis].back(); }

  /// Index i of the interval [c[i], c[i+1]) containing v; the last interval is
  /// closed. Empty when v lies outside [c[0], c[last]] or is not finite.
  std::optional<std::uint32_t> interval_of(std::size_t axis, double v) const noexcept;

  friend bool operator==(const RectilinearAxes&, const RectilinearAxes&) = default;

 private:
  std::array<std::vector<double>, 3> coords_;
};

class RegionGrid {
 public:
  RegionGrid() = default;

  /// Balanced split of each axis. Throws InvalidDecomposition when any input
  /// is zero or a region count exceeds the point count on its axis.
  static RegionGrid build(const Index3& dims, const Index3& region_counts);

  /// Rebuilds a grid from explicit extent tables (e.g. read from disk);
  /// throws InvalidDecomposition if the tables violate the partition invariants.
  static RegionGrid from_extents(const Index3& dims, std::array<std::vector<Extent>, 3> extents);

  const Index3& dims() const noexcept { return dims_; }
  const Index3& region_counts() const noexcept { return counts_; }
  std::span<const Extent> extents(std::size_t axis) const noexcept { return extents_[axis]; }

  std::uint32_t region_count() const noexcept { return counts_[0] * counts_[1] * counts_[2]; }
  std::uint64_t cell_count() const noexcept {
    return std::uint64_t{dims_[0]} * dims_[1] * dims_[2];
  }

  bool valid(RegionId r) const noexcept { return r.value < region_count(); }
  RegionId linearize(const Index3& region_index) const noexcept;
  Index3 delinearize(RegionId r) const;

  /// The three index ranges covered by region r.
  std::array<Extent, 3> region_box(RegionId r) const;
  std::uint64_t region_cell_count(RegionId r) const;

  /// Throws OutOfBounds unless 0 <= cell[a] < dims[a] on every axis.
  RegionId region_of_cell(const Index3& cell) const;

  /// Region containing a free point; empty (not an error) outside the domain.
  /// A point on an interior region boundary belongs to the higher region.
  std::optional<RegionId> region_of_point(const RectilinearAxes& axes, const Point3& p) const;

  friend bool operator==(const RegionGrid&, const RegionGrid&) = default;

 private:
  std::uint32_t extent_index(std::size_t axis, std::uint32_t i) const noexcept;

  Index3 dims_{};
  Index3 counts_{};
  std::array<std::vector<Extent>, 3> extents_;
};

}  // namespace regsum
