#include "regsum/summarizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "regsum/error.hpp"
#include "regsum/parallel.hpp"

namespace regsum {

void PdfConfig::validate() const {
  if (var_ids.empty() || var_ids.size() > 2) {
    throw Error(ErrorCode::InvalidConfig, "a PDF config needs 1 or 2 variables");
  }
  if (var_ids.size() == 2 && var_ids[0] == var_ids[1]) {
    throw Error(ErrorCode::InvalidConfig, "2D config variables must be distinct");
  }
  if (condition && !(condition->lo <= condition->hi)) {
    throw Error(ErrorCode::InvalidConfig, "condition lo must not exceed hi");
  }
  if (strategy.max_bins == 0) throw Error(ErrorCode::InvalidConfig, "max_bins must be >= 1");
}

const RegionalHistogram& TimestepSummary::at(RegionId r, std::size_t config) const {
  auto it = std::lower_bound(regions.begin(), regions.end(), r,
                             [](const RegionSummary& s, RegionId id) { return s.region < id; });
  if (it == regions.end() || it->region != r) {
    throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value) + " not in summary");
  }
  if (config >= it->per_config.size()) {
    throw Error(ErrorCode::InvalidConfig, "config " + std::to_string(config) + " out of range");
  }
  return it->per_config[config];
}

namespace {

void check_variables(const FieldBlock& block, const PdfConfig& config) {
  auto check = [&](VarId v) {
    if (v >= block.values.size()) {
      throw Error(ErrorCode::UnknownVariable, "variable " + std::to_string(v) + " not in block");
    }
  };
  for (VarId v : config.var_ids) check(v);
  if (config.condition) check(config.condition->var);
}

void check_block_shape(const FieldBlock& block) {
  for (const auto& v : block.values) {
    if (v.size() != block.size()) {
      throw Error(ErrorCode::Incompatible, "block values do not match its extents");
    }
  }
}

}  // namespace

RegionalHistogram summarize_region(const FieldBlock& block, const std::array<Extent, 3>& box,
                                   const PdfConfig& config) {
  config.validate();
  check_variables(block, config);
  const std::size_t nd = config.ndims();

  std::vector<std::vector<double>> admitted(nd);
  for (std::uint32_t z = box[2].lo; z < box[2].hi; ++z) {
    for (std::uint32_t y = box[1].lo; y < box[1].hi; ++y) {
      for (std::uint32_t x = box[0].lo; x < box[0].hi; ++x) {
        const std::size_t idx = block.local_index(x, y, z);
        if (config.condition && !config.condition->admits(block.values[config.condition->var][idx])) {
          continue;
        }
        for (std::size_t d = 0; d < nd; ++d) admitted[d].push_back(block.values[config.var_ids[d]][idx]);
      }
    }
  }
  const std::size_t n = admitted[0].size();

  // Pass A: stats over the finite admitted samples.
  std::vector<std::vector<double>> finite(nd);
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (std::size_t d = 0; d < nd; ++d) ok = ok && std::isfinite(admitted[d][i]);
    if (!ok) continue;
    for (std::size_t d = 0; d < nd; ++d) finite[d].push_back(admitted[d][i]);
  }
  const bool quartiles = config.strategy.kind == Strategy::FreedmanDiaconis;
  std::vector<BinEdges> edges;
  for (std::size_t d = 0; d < nd; ++d) {
    if (finite[d].empty()) {
      edges.push_back(BinEdges{0.0, 1.0, 1});
    } else {
      edges.push_back(edges_from_strategy(compute_stats(finite[d], quartiles), config.strategy));
    }
  }

  // Pass B: bin every admitted sample.
  RegionalHistogram h = nd == 1 ? RegionalHistogram(config.var_ids[0], edges[0])
                                : RegionalHistogram(config.var_ids[0], config.var_ids[1], edges[0], edges[1]);
  if (nd == 1) {
    for (double x : admitted[0]) h.accumulate(x);
  } else {
    for (std::size_t i = 0; i < n; ++i) h.accumulate(admitted[0][i], admitted[1][i]);
  }
  return h;
}

TimestepSummary summarize_block(double time, const FieldBlock& block, const RegionGrid& grid,
                                std::span<const PdfConfig> configs) {
  check_block_shape(block);
  for (const auto& c : configs) {
    c.validate();
    check_variables(block, c);
  }
  // Regions overlapping the block on each axis must lie wholly inside it.
  std::array<std::vector<std::uint32_t>, 3> axis_regions;
  for (std::size_t a = 0; a < 3; ++a) {
    const Extent be = block.extents[a];
    if (be.hi > grid.dims()[a] || be.lo >= be.hi) {
      throw Error(ErrorCode::IncompleteTiling, "block extent outside the grid");
    }
    const auto ext = grid.extents(a);
    for (std::uint32_t r = 0; r < ext.size(); ++r) {
      const bool overlaps = ext[r].lo < be.hi && be.lo < ext[r].hi;
      if (!overlaps) continue;
      if (ext[r].lo < be.lo || ext[r].hi > be.hi) {
        throw Error(ErrorCode::BlockMisaligned,
                    "region extent [" + std::to_string(ext[r].lo) + ", " + std::to_string(ext[r].hi) +
                        ") straddles a block boundary on axis " + std::to_string(a));
      }
      axis_regions[a].push_back(r);
    }
  }

  std::vector<RegionId> ids;
  for (auto iz : axis_regions[2]) {
    for (auto iy : axis_regions[1]) {
      for (auto ix : axis_regions[0]) ids.push_back(grid.linearize({ix, iy, iz}));
    }
  }
  TimestepSummary out;
  out.time = time;
  out.regions.resize(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const auto box = grid.region_box(ids[i]);
    RegionSummary& rs = out.regions[i];
    rs.region = ids[i];
    rs.per_config.reserve(configs.size());
    for (const auto& c : configs) rs.per_config.push_back(summarize_region(block, box, c));
  });
  return out;
}

TimestepSummary summarize_timestep(double time, std::span<const FieldBlock> blocks,
                                   const RegionGrid& grid, std::span<const PdfConfig> configs) {
  const Index3 dims = grid.dims();
  std::vector<std::uint8_t> cover(grid.cell_count(), 0);
  for (const auto& b : blocks) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (b.extents[a].hi > dims[a] || b.extents[a].lo >= b.extents[a].hi) {
        throw Error(ErrorCode::IncompleteTiling, "block extent outside the grid");
      }
    }
    for (std::uint32_t z = b.extents[2].lo; z < b.extents[2].hi; ++z) {
      for (std::uint32_t y = b.extents[1].lo; y < b.extents[1].hi; ++y) {
        for (std::uint32_t x = b.extents[0].lo; x < b.extents[0].hi; ++x) {
          auto& c = cover[x + std::size_t{dims[0]} * (y + std::size_t{dims[1]} * z)];
          if (c != 0) throw Error(ErrorCode::IncompleteTiling, "blocks overlap");
          c = 1;
        }
      }
    }
  }
  if (std::find(cover.begin(), cover.end(), std::uint8_t{0}) != cover.end()) {
    throw Error(ErrorCode::IncompleteTiling, "blocks leave cells uncovered");
  }

  std::vector<TimestepSummary> parts;
  parts.reserve(blocks.size());
  for (const auto& b : blocks) parts.push_back(summarize_block(time, b, grid, configs));
  return merge_partials(parts);
}

namespace {

using CanonicalKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, double, double,
                                const std::vector<std::uint64_t>&>;

CanonicalKey canonical_key(const RegionalHistogram& h) {
  const double s = h.stats.empty() ? 0.0 : h.stats[0].sum;
  const double s2 = h.stats.empty() ? 0.0 : h.stats[0].sum_sq;
  return {h.sample_count, h.out_of_range, h.invalid, s, s2, h.counts};
}

bool canonical_less(const RegionSummary* a, const RegionSummary* b) {
  for (std::size_t c = 0; c < a->per_config.size(); ++c) {
    const auto ka = canonical_key(a->per_config[c]);
    const auto kb = canonical_key(b->per_config[c]);
    if (ka != kb) return ka < kb;
  }
  return false;
}

}  // namespace

TimestepSummary merge_partials(std::span<const TimestepSummary> parts) {
  TimestepSummary out;
  if (parts.empty()) return out;
  out.time = parts.front().time;
  std::map<RegionId, std::vector<const RegionSummary*>> by_region;
  std::optional<std::size_t> nconfigs;
  for (const auto& p : parts) {
    if (p.time != out.time) throw Error(ErrorCode::Incompatible, "fragments disagree on time");
    for (const auto& rs : p.regions) {
      if (nconfigs && *nconfigs != rs.per_config.size()) {
        throw Error(ErrorCode::Incompatible, "fragments disagree on config count");
      }
      nconfigs = rs.per_config.size();
      by_region[rs.region].push_back(&rs);
    }
  }
  out.regions.reserve(by_region.size());
  for (auto& [region, list] : by_region) {
    if (list.size() == 1) {
      out.regions.push_back(*list.front());
      continue;
    }
    std::sort(list.begin(), list.end(), canonical_less);
    RegionSummary acc = *list.front();
    for (std::size_t i = 1; i < list.size(); ++i) {
      for (std::size_t c = 0; c < acc.per_config.size(); ++c) {
        acc.per_config[c] = add_same_edges(acc.per_config[c], list[i]->per_config[c]);
      }
    }
    out.regions.push_back(std::move(acc));
  }
  return out;
}

std::vector<std::array<Extent, 3>> aligned_blocks(const RegionGrid& grid, const Index3& block_counts) {
  const RegionGrid groups = RegionGrid::build(grid.region_counts(), block_counts);
  std::array<std::vector<Extent>, 3> spans;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto ext = grid.extents(a);
    for (const Extent& g : groups.extents(a)) {
      spans[a].push_back({ext[g.lo].lo, ext[g.hi - 1].hi});
    }
  }
  std::vector<std::array<Extent, 3>> out;
  for (const Extent& ez : spans[2]) {
    for (const Extent& ey : spans[1]) {
      for (const Extent& ex : spans[0]) out.push_back({ex, ey, ez});
    }
  }
  return out;
}

std::vector<FieldBlock> split_aligned(const FieldBlock& whole, const RegionGrid& grid,
                                      const Index3& block_counts) {
  std::vector<FieldBlock> blocks;
  for (const auto& box : aligned_blocks(grid, block_counts)) {
    const auto& [ex, ey, ez] = box;
    FieldBlock b;
    b.extents = box;
    b.values.resize(whole.values.size());
    for (auto& v : b.values) v.reserve(b.size());
    for (std::uint32_t z = ez.lo; z < ez.hi; ++z) {
      for (std::uint32_t y = ey.lo; y < ey.hi; ++y) {
        for (std::uint32_t x = ex.lo; x < ex.hi; ++x) {
          const std::size_t src = whole.local_index(x, y, z);
          for (std::size_t v = 0; v < whole.values.size(); ++v) b.values[v].push_back(whole.values[v][src]);
        }
      }
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace regsum
