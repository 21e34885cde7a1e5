#include "regsum/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regsum/error.hpp"

namespace regsum {

namespace {

void check_axis(const std::vector<double>& c, const char* name) {
  if (c.size() < 2) {
    throw Error(ErrorCode::InvalidAxes, std::string("axis ") + name + " needs at least 2 points");
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || (i > 0 && !(c[i] > c[i - 1]))) {
      throw Error(ErrorCode::InvalidAxes,
                  std::string("axis ") + name + " must be finite and strictly increasing");
    }
  }
}

}  // namespace

RectilinearAxes::RectilinearAxes(std::vector<double> x, std::vector<double> y,
                                 std::vector<double> z)
    : coords_{std::move(x), std::move(y), std::move(z)} {
  check_axis(coords_[0], "x");
  check_axis(coords_[1], "y");
  check_axis(coords_[2], "z");
}

RectilinearAxes RectilinearAxes::uniform(const Index3& dims, const Point3& lo, const Point3& hi) {
  std::array<std::vector<double>, 3> c;
  for (std::size_t a = 0; a < 3; ++a) {
    c[a].resize(dims[a]);
    for (std::uint32_t i = 0; i < dims[a]; ++i) {
      c[a][i] = dims[a] > 1 ? lo[a] + (hi[a] - lo[a]) * i / (dims[a] - 1) : lo[a];
    }
  }
  return RectilinearAxes(std::move(c[0]), std::move(c[1]), std::move(c[2]));
}

Index3 RectilinearAxes::dims() const noexcept {
  return {static_cast<std::uint32_t>(coords_[0].size()),
          static_cast<std::uint32_t>(coords_[1].size()),
          static_cast<std::uint32_t>(coords_[2].size())};
}

std::optional<std::uint32_t> RectilinearAxes::interval_of(std::size_t axis, double v) const noexcept {
  const auto& c = coords_[axis];
  if (c.size() < 2 || !(v >= c.front() && v <= c.back())) return std::nullopt;
  if (v == c.back()) return static_cast<std::uint32_t>(c.size() - 2);
  auto it = std::upper_bound(c.begin(), c.end(), v);
  return static_cast<std::uint32_t>(std::distance(c.begin(), it) - 1);
}

RegionGrid RegionGrid::build(const Index3& dims, const Index3& region_counts) {
  std::array<std::vector<Extent>, 3> extents;
  for (std::size_t a = 0; a < 3; ++a) {
    if (dims[a] == 0 || region_counts[a] == 0) {
      throw Error(ErrorCode::InvalidDecomposition, "dims and region counts must be positive");
    }
    if (region_counts[a] > dims[a]) {
      throw Error(ErrorCode::InvalidDecomposition,
                  "axis " + std::to_string(a) + ": " + std::to_string(region_counts[a]) +
                      " regions exceed " + std::to_string(dims[a]) + " points");
    }
    const std::uint32_t base = dims[a] / region_counts[a];
    const std::uint32_t longer = dims[a] % region_counts[a];
    std::uint32_t lo = 0;
    for (std::uint32_t r = 0; r < region_counts[a]; ++r) {
      const std::uint32_t len = base + (r < longer ? 1 : 0);
      extents[a].push_back({lo, lo + len});
      lo += len;
    }
  }
  RegionGrid g;
  g.dims_ = dims;
  g.counts_ = region_counts;
  g.extents_ = std::move(extents);
  return g;
}

RegionGrid RegionGrid::from_extents(const Index3& dims, std::array<std::vector<Extent>, 3> extents) {
  Index3 counts{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& e = extents[a];
    if (dims[a] == 0 || e.empty() || e.size() > dims[a]) {
      throw Error(ErrorCode::InvalidDecomposition, "bad extent table size");
    }
    std::uint32_t expect = 0;
    std::uint32_t shortest = dims[a];
    std::uint32_t longest = 0;
    for (const auto& x : e) {
      if (x.lo != expect || x.hi <= x.lo) {
        throw Error(ErrorCode::InvalidDecomposition, "extents must be contiguous and non-empty");
      }
      shortest = std::min(shortest, x.size());
      longest = std::max(longest, x.size());
      expect = x.hi;
    }
    if (expect != dims[a]) {
      throw Error(ErrorCode::InvalidDecomposition, "extents do not cover the axis");
    }
    if (longest - shortest > 1) {
      throw Error(ErrorCode::InvalidDecomposition, "extents are not balanced");
    }
    counts[a] = static_cast<std::uint32_t>(e.size());
  }
  RegionGrid g;
  g.dims_ = dims;
  g.counts_ = counts;
  g.extents_ = std::move(extents);
  return g;
}

RegionId RegionGrid::linearize(const Index3& ri) const noexcept {
  return RegionId{ri[0] + counts_[0] * (ri[1] + counts_[1] * ri[2])};
}

Index3 RegionGrid::delinearize(RegionId r) const {
  if (!valid(r)) throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
  const std::uint32_t ix = r.value % counts_[0];
  const std::uint32_t rest = r.value / counts_[0];
  return {ix, rest % counts_[1], rest / counts_[1]};
}

std::array<Extent, 3> RegionGrid::region_box(RegionId r) const {
  const Index3 ri = delinearize(r);
  return {extents_[0][ri[0]], extents_[1][ri[1]], extents_[2][ri[2]]};
}

std::uint64_t RegionGrid::region_cell_count(RegionId r) const {
  const auto box = region_box(r);
  return std::uint64_t{box[0].size()} * box[1].size() * box[2].size();
}

std::uint32_t RegionGrid::extent_index(std::size_t axis, std::uint32_t i) const noexcept {
  const auto& e = extents_[axis];
  auto it = std::upper_bound(e.begin(), e.end(), i,
                             [](std::uint32_t v, const Extent& x) { return v < x.lo; });
  return static_cast<std::uint32_t>(std::distance(e.begin(), it) - 1);
}

RegionId RegionGrid::region_of_cell(const Index3& cell) const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (cell[a] >= dims_[a]) {
      throw Error(ErrorCode::OutOfBounds, "cell index " + std::to_string(cell[a]) +
                                              " outside axis " + std::to_string(a));
    }
  }
  return linearize({extent_index(0, cell[0]), extent_index(1, cell[1]), extent_index(2, cell[2])});
}

std::optional<RegionId> RegionGrid::region_of_point(const RectilinearAxes& axes,
                                                    const Point3& p) const {
  Index3 cell{};
  for (std::size_t a = 0; a < 3; ++a) {
    auto i = axes.interval_of(a, p[a]);
    if (!i) return std::nullopt;
    cell[a] = *i;
  }
  return region_of_cell(cell);
}

}  // namespace regsum
