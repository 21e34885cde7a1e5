#include "regsum/particles.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include "regsum/error.hpp"
#include "regsum/store.hpp"

namespace regsum {

std::uint64_t ParticleIndexTable::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void ParticleIndexTable::validate(std::uint64_t total_records) const {
  if (offsets.size() != counts.size()) {
    throw Error(ErrorCode::MalformedFile, "index offsets and counts differ in length");
  }
  std::uint64_t expect = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (offsets[r] != expect) {
      throw Error(ErrorCode::MalformedFile, "index offset of region " + std::to_string(r) +
                                                " breaks the offset chain");
    }
    expect += counts[r];
  }
  if (expect != total_records) {
    throw Error(ErrorCode::MalformedFile, "index counts do not sum to the record count");
  }
}

SortedParticles sort_and_index(std::span<const ParticleRecord> particles, const RegionGrid& grid,
                               const RectilinearAxes& axes) {
  SortedParticles out;
  std::vector<std::pair<std::uint32_t, std::size_t>> keyed;
  keyed.reserve(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (auto r = grid.region_of_point(axes, particles[i].pos)) {
      keyed.emplace_back(r->value, i);
    } else {
      out.out_of_domain.push_back(particles[i]);
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::uint32_t nregions = grid.region_count();
  out.table.counts.assign(nregions, 0);
  out.table.offsets.assign(nregions, 0);
  out.records.reserve(keyed.size());
  for (const auto& [region, i] : keyed) {
    ++out.table.counts[region];
    out.records.push_back(particles[i]);
  }
  std::uint64_t offset = 0;
  for (std::uint32_t r = 0; r < nregions; ++r) {
    out.table.offsets[r] = offset;
    offset += out.table.counts[r];
  }
  return out;
}

std::vector<ParticleRecord> extract(const ParticleStoreReader& store, std::size_t timestep,
                                    std::span<const RegionId> selection,
                                    std::span<const RefineRange> refine) {
  std::vector<RegionId> ids(selection.begin(), selection.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (RegionId r : ids) {
    if (r.value >= store.region_count()) {
      throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
    }
  }
  std::vector<ParticleRecord> out;
  for (RegionId r : ids) {
    for (auto& p : store.read_region(timestep, r)) {
      const bool keep = std::all_of(refine.begin(), refine.end(),
                                    [&](const RefineRange& f) { return f.admits(p); });
      if (keep) out.push_back(std::move(p));
    }
  }
  return out;
}

std::string records_to_csv(std::span<const ParticleRecord> records, std::span<const std::string> names) {
  std::string out = "id,x,y,z";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  char buf[64];
  for (const auto& r : records) {
    out += std::to_string(r.id);
    for (double c : r.pos) {
      std::snprintf(buf, sizeof buf, ",%.17g", c);
      out += buf;
    }
    for (float v : r.values) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace regsum
