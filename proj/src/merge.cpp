#include <algorithm>
#include <cmath>

#include "regsum/error.hpp"
#include "regsum/histogram.hpp"

namespace regsum {

namespace {

struct Overlap {
  std::uint32_t first = 0;
  std::vector<double> fractions;
};

/// Share of the source interval [a, b] falling in each target bin. Fractions
/// are normalized to sum to one so redistribution conserves mass.
Overlap overlap_fractions(const BinEdges& target, double a, double b) {
  Overlap o;
  const std::uint32_t first = target.bin_of(a).value_or(0);
  double total = 0.0;
  for (std::uint32_t j = first; j < target.nbins && target.lower(j) < b; ++j) {
    const double ov = std::min(b, target.upper(j)) - std::max(a, target.lower(j));
    o.fractions.push_back(std::max(0.0, ov));
    total += o.fractions.back();
  }
  o.first = first;
  if (!(total > 0.0)) {
    const double mid = 0.5 * (a + b);
    o.first = target.bin_of(mid).value_or(mid >= target.max ? target.nbins - 1 : 0);
    o.fractions.assign(1, 1.0);
    return o;
  }
  for (auto& f : o.fractions) f /= total;
  return o;
}

MergedPdf merge_identical(std::span<const RegionalHistogram* const> hs,
                          const RegionalHistogram& head) {
  std::vector<std::uint64_t> sums(head.counts.size(), 0);
  MergedPdf m;
  m.var_ids = head.var_ids;
  m.edges = head.edges;
  m.stats.assign(head.ndims(), VariableStats{});
  for (const auto* h : hs) {
    if (h->edges == head.edges) {
      for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += h->counts[k];
    }
    m.out_of_range += h->out_of_range;
    m.invalid += h->invalid;
    m.sample_count += h->sample_count;
    for (std::size_t d = 0; d < m.stats.size(); ++d) m.stats[d] = combine(m.stats[d], h->stats[d]);
  }
  m.counts.assign(sums.begin(), sums.end());
  m.source_region_count = hs.size();
  return m;
}

// Adds h's counts to m, spreading each source bin over the target bins it
// overlaps.
void fold_into(MergedPdf& m, const RegionalHistogram& h) {
  const std::size_t nd = m.ndims();
  const std::size_t t0 = m.edges[0].nbins;
  std::vector<std::vector<Overlap>> per_axis(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const BinEdges& e = h.edges[d];
    per_axis[d].reserve(e.nbins);
    for (std::uint32_t i = 0; i < e.nbins; ++i) {
      per_axis[d].push_back(overlap_fractions(m.edges[d], e.lower(i), e.upper(i)));
    }
  }
  const std::uint32_t s0 = h.edges[0].nbins;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const auto c = static_cast<double>(h.counts[k]);
    if (c == 0.0) continue;
    if (nd == 1) {
      const Overlap& o = per_axis[0][k];
      for (std::size_t f = 0; f < o.fractions.size(); ++f) m.counts[o.first + f] += c * o.fractions[f];
      continue;
    }
    const Overlap& ox = per_axis[0][k % s0];
    const Overlap& oy = per_axis[1][k / s0];
    for (std::size_t fy = 0; fy < oy.fractions.size(); ++fy) {
      const double cy = c * oy.fractions[fy];
      const std::size_t row = (oy.first + fy) * t0;
      for (std::size_t fx = 0; fx < ox.fractions.size(); ++fx) {
        m.counts[row + ox.first + fx] += cy * ox.fractions[fx];
      }
    }
  }
}

}  // namespace

MergedPdf redistribute(const RegionalHistogram& h, std::span<const BinEdges> target) {
  if (target.size() != h.ndims()) throw Error(ErrorCode::Incompatible, "target edges must match the dimensionality");
  MergedPdf m;
  m.var_ids = h.var_ids;
  m.edges.assign(target.begin(), target.end());
  m.counts.assign(m.edges.size() == 1 ? m.edges[0].nbins : std::size_t{m.edges[0].nbins} * m.edges[1].nbins, 0.0);
  m.out_of_range = h.out_of_range;
  m.invalid = h.invalid;
  m.sample_count = h.sample_count;
  m.stats = h.stats;
  for (auto& st : m.stats) st.q1 = st.q3 = std::nullopt;
  m.source_region_count = 1;
  if (h.sample_count > 0) fold_into(m, h);
  return m;
}

MergedPdf merge_general(std::span<const RegionalHistogram> hs) {
  std::vector<const RegionalHistogram*> ptrs;
  ptrs.reserve(hs.size());
  for (const auto& h : hs) ptrs.push_back(&h);
  return merge_general(std::span<const RegionalHistogram* const>(ptrs));
}

MergedPdf merge_general(std::span<const RegionalHistogram* const> hs) {
  if (hs.empty()) throw Error(ErrorCode::EmptyInput, "nothing to merge");
  const std::size_t nd = hs.front()->ndims();
  for (const auto* h : hs) {
    if (h->ndims() != nd || h->var_ids != hs.front()->var_ids) {
      throw Error(ErrorCode::Incompatible, "merged histograms must share dimensionality and variables");
    }
  }
  // Empty histograms carry placeholder edges; they contribute counters only.
  std::vector<const RegionalHistogram*> shaping;
  for (const auto* h : hs) {
    if (h->sample_count > 0) shaping.push_back(h);
  }
  if (shaping.empty()) shaping.assign(hs.begin(), hs.end());
  const RegionalHistogram& head = *shaping.front();
  const bool identical = std::all_of(shaping.begin(), shaping.end(),
                                     [&](const auto* h) { return h->edges == head.edges; });
  if (identical) return merge_identical(hs, head);

  MergedPdf m;
  m.var_ids = head.var_ids;
  m.stats.assign(nd, VariableStats{});
  for (std::size_t d = 0; d < nd; ++d) {
    double lo = head.edges[d].min;
    double hi = head.edges[d].max;
    std::uint32_t nbins = head.edges[d].nbins;
    for (const auto* h : shaping) {
      lo = std::min(lo, h->edges[d].min);
      hi = std::max(hi, h->edges[d].max);
      nbins = std::max(nbins, h->edges[d].nbins);
    }
    m.edges.push_back(BinEdges::make(lo, hi, nbins));
  }
  const std::size_t t0 = m.edges[0].nbins;
  m.counts.assign(nd == 1 ? t0 : t0 * m.edges[1].nbins, 0.0);

  // Each source is folded straight into the target; fractions per source bin
  // are computed per axis and reused across the other axis.
  for (const auto* h : hs) {
    m.out_of_range += h->out_of_range;
    m.invalid += h->invalid;
    m.sample_count += h->sample_count;
    for (std::size_t d = 0; d < nd; ++d) m.stats[d] = combine(m.stats[d], h->stats[d]);
    if (h->sample_count > 0) fold_into(m, *h);
  }
  m.source_region_count = hs.size();
  return m;
}

}  // namespace regsum
