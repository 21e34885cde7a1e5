#pragma once

// Shared fixtures and brute-force oracles for the test suites.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "regsum/grid.hpp"
#include "regsum/histogram.hpp"
#include "regsum/summarizer.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("regsum_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
}

/// Bin by linear scan over the edge values, last bin closed.
inline std::optional<std::uint32_t> scan_bin(const regsum::BinEdges& e, double x) {
  if (!std::isfinite(x)) return std::nullopt;
  for (std::uint32_t i = 0; i < e.nbins; ++i) {
    const bool last = i + 1 == e.nbins;
    if (x >= e.lower(i) && (x < e.upper(i) || (last && x <= e.upper(i)))) return i;
  }
  return std::nullopt;
}

/// Histogram of the (optionally condition-filtered) samples of one region box,
/// on the given edges, by linear scan.
inline std::vector<std::uint64_t> brute_counts(const regsum::FieldBlock& block, const std::array<regsum::Extent, 3>& box,
                                              const regsum::PdfConfig& cfg,
                                              std::span<const regsum::BinEdges> edges) {
  std::size_t total = edges[0].nbins;
  if (edges.size() == 2) total *= edges[1].nbins;
  std::vector<std::uint64_t> counts(total, 0);
  for (std::uint32_t z = box[2].lo; z < box[2].hi; ++z) {
    for (std::uint32_t y = box[1].lo; y < box[1].hi; ++y) {
      for (std::uint32_t x = box[0].lo; x < box[0].hi; ++x) {
        const std::size_t i = block.local_index(x, y, z);
        if (cfg.condition && !cfg.condition->admits(block.values[cfg.condition->var][i])) continue;
        const auto b0 = scan_bin(edges[0], block.values[cfg.var_ids[0]][i]);
        if (!b0) continue;
        if (edges.size() == 1) {
          ++counts[*b0];
          continue;
        }
        const auto b1 = scan_bin(edges[1], block.values[cfg.var_ids[1]][i]);
        if (b1) ++counts[*b0 + std::size_t{edges[0].nbins} * *b1];
      }
    }
  }
  return counts;
}

/// Values of one variable inside a region box, x-fastest.
inline std::vector<double> box_samples(const regsum::FieldBlock& block, const std::array<regsum::Extent, 3>& box,
                                       regsum::VarId var) {
  std::vector<double> out;
  for (std::uint32_t z = box[2].lo; z < box[2].hi; ++z) {
    for (std::uint32_t y = box[1].lo; y < box[1].hi; ++y) {
      for (std::uint32_t x = box[0].lo; x < box[0].hi; ++x) out.push_back(block.values[var][block.local_index(x, y, z)]);
    }
  }
  return out;
}

/// Whole-volume block of nvars random variables.
inline regsum::FieldBlock random_block(const regsum::Index3& dims, std::size_t nvars, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  regsum::FieldBlock b;
  b.extents = {regsum::Extent{0, dims[0]}, regsum::Extent{0, dims[1]}, regsum::Extent{0, dims[2]}};
  b.values.assign(nvars, std::vector<double>(b.size()));
  for (auto& v : b.values) {
    for (auto& x : v) x = uniform(rng, -3.0, 5.0) * uniform(rng, 0.0, 1.0);
  }
  return b;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

}  // namespace testing
