#include "regsum/histogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "regsum/error.hpp"

namespace regsum {

BinEdges BinEdges::make(double min, double max, std::uint32_t nbins) {
  if (!(std::isfinite(min) && std::isfinite(max)) || !(min < max) || nbins == 0) {
    throw Error(ErrorCode::InvalidEdges, "edges need finite min < max and nbins >= 1 (got [" +
                                             std::to_string(min) + ", " + std::to_string(max) +
                                             "], " + std::to_string(nbins) + ")");
  }
  BinEdges e{min, max, nbins};
  const double w = e.width();
  if (!(std::isfinite(w) && w > 0.0)) {
    throw Error(ErrorCode::InvalidEdges, "bin width is not finite and positive");
  }
  return e;
}

std::optional<std::uint32_t> BinEdges::bin_of(double x) const noexcept {
  if (!(x >= min && x <= max)) return std::nullopt;
  if (x == max) return nbins - 1;
  const double pos = std::floor((x - min) / width());
  std::uint32_t i = pos <= 0.0 ? 0u : static_cast<std::uint32_t>(std::min<double>(pos, nbins - 1));
  // Snap to the edge values so lookup agrees with a scan over lower()/upper().
  while (i > 0 && x < lower(i)) --i;
  while (i + 1 < nbins && x >= lower(i + 1)) ++i;
  return i;
}

namespace {

// Adds a + residual into the compensated pair (value, residual) so that value
// stays the rounded total.
void compensated_add(double& value, double& residual, double a, double a_residual) noexcept {
  const double t = value + a;
  const double bp = t - value;
  const double err = (value - (t - bp)) + (a - bp);
  const double lo = residual + a_residual + err;
  value = t + lo;
  residual = lo - (value - t);
}

}  // namespace

void VariableStats::add(double x) noexcept {
  if (count == 0) {
    min = x;
    max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  const double sq = x * x;
  compensated_add(sum, sum_residual, x, 0.0);
  compensated_add(sum_sq, sum_sq_residual, sq, std::fma(x, x, -sq));
  ++count;
}

double VariableStats::variance() const noexcept {
  if (count == 0) return 0.0;
  const auto n = static_cast<long double>(count);
  const long double m = static_cast<long double>(sum) / n;
  return std::max(0.0, static_cast<double>(static_cast<long double>(sum_sq) / n - m * m));
}

VariableStats combine(const VariableStats& a, const VariableStats& b) noexcept {
  if (b.count == 0) {
    VariableStats r = a;
    r.q1.reset();
    r.q3.reset();
    return r;
  }
  if (a.count == 0) {
    VariableStats r = b;
    r.q1.reset();
    r.q3.reset();
    return r;
  }
  VariableStats r;
  r.count = a.count + b.count;
  r.min = std::min(a.min, b.min);
  r.max = std::max(a.max, b.max);
  r.sum = a.sum;
  r.sum_residual = a.sum_residual;
  compensated_add(r.sum, r.sum_residual, b.sum, b.sum_residual);
  r.sum_sq = a.sum_sq;
  r.sum_sq_residual = a.sum_sq_residual;
  compensated_add(r.sum_sq, r.sum_sq_residual, b.sum_sq, b.sum_sq_residual);
  return r;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyStats, "quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

VariableStats compute_stats(std::span<const double> samples, bool quartiles) {
  VariableStats s;
  for (double x : samples) s.add(x);
  if (quartiles && !samples.empty()) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    s.q1 = quantile_sorted(sorted, 0.25);
    s.q3 = quantile_sorted(sorted, 0.75);
  }
  return s;
}

std::uint32_t sturges_bins(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::EmptyStats, "Sturges rule needs at least one sample");
  // ceil(log2 n) is the bit width of n - 1.
  return static_cast<std::uint32_t>(std::bit_width(n - 1)) + 1;
}

double scott_width(const VariableStats& stats) {
  if (stats.count == 0) throw Error(ErrorCode::EmptyStats, "Scott rule needs at least one sample");
  const double s = std::sqrt(stats.variance());
  return 3.49 * s / std::cbrt(static_cast<double>(stats.count));
}

double freedman_diaconis_width(const VariableStats& stats) {
  if (stats.count == 0) throw Error(ErrorCode::EmptyStats, "FD rule needs at least one sample");
  if (!stats.q1 || !stats.q3) {
    throw Error(ErrorCode::MissingQuartiles, "Freedman-Diaconis needs q1 and q3");
  }
  const double iqr = *stats.q3 - *stats.q1;
  return 2.0 * iqr / std::cbrt(static_cast<double>(stats.count));
}

namespace {

std::uint32_t clamp_bins(double k, std::uint32_t max_bins) {
  const std::uint32_t cap = std::max<std::uint32_t>(1, max_bins);
  if (!(k >= 1.0)) return 1;
  if (k >= static_cast<double>(cap)) return cap;
  return static_cast<std::uint32_t>(k);
}

std::uint32_t bins_for_width(double range, double h, std::uint32_t max_bins) {
  if (!(h > 0.0) || !std::isfinite(h)) return std::max<std::uint32_t>(1, max_bins);
  return clamp_bins(std::ceil(range / h), max_bins);
}

}  // namespace

BinEdges edges_from_strategy(const VariableStats& stats, const BinningStrategy& strategy) {
  if (stats.count == 0) throw Error(ErrorCode::EmptyStats, "cannot derive edges without samples");
  if (strategy.kind == Strategy::FreedmanDiaconis && (!stats.q1 || !stats.q3)) {
    throw Error(ErrorCode::MissingQuartiles, "Freedman-Diaconis needs q1 and q3");
  }
  if (!(stats.min < stats.max)) {
    const double eps = std::max(std::abs(stats.min) * 1e-9, 1e-12);
    return BinEdges::make(stats.min, stats.min + eps, 1);
  }
  const double range = stats.max - stats.min;
  std::uint32_t nbins = 1;
  switch (strategy.kind) {
    case Strategy::Sturges:
      nbins = clamp_bins(sturges_bins(stats.count), strategy.max_bins);
      break;
    case Strategy::Scott:
      nbins = bins_for_width(range, scott_width(stats), strategy.max_bins);
      break;
    case Strategy::FreedmanDiaconis:
      nbins = bins_for_width(range, freedman_diaconis_width(stats), strategy.max_bins);
      break;
    case Strategy::Fixed:
      nbins = std::max<std::uint32_t>(1, strategy.max_bins);
      break;
  }
  return BinEdges::make(stats.min, stats.max, nbins);
}

RegionalHistogram::RegionalHistogram(VarId var, const BinEdges& e)
    : var_ids{var}, edges{e}, counts(e.nbins, 0), stats(1) {}

RegionalHistogram::RegionalHistogram(VarId var0, VarId var1, const BinEdges& e0, const BinEdges& e1)
    : var_ids{var0, var1},
      edges{e0, e1},
      counts(std::size_t{e0.nbins} * e1.nbins, 0),
      stats(2) {}

void RegionalHistogram::accumulate(double x) {
  if (!std::isfinite(x)) {
    ++invalid;
    return;
  }
  auto i = edges[0].bin_of(x);
  if (!i) {
    ++out_of_range;
    return;
  }
  ++counts[*i];
  ++sample_count;
  stats[0].add(x);
}

void RegionalHistogram::accumulate(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    ++invalid;
    return;
  }
  auto i = edges[0].bin_of(x);
  auto j = edges[1].bin_of(y);
  if (!i || !j) {
    ++out_of_range;
    return;
  }
  ++counts[*i + std::size_t{edges[0].nbins} * *j];
  ++sample_count;
  stats[0].add(x);
  stats[1].add(y);
}

void RegionalHistogram::accumulate(std::span<const double> sample) {
  if (sample.size() != ndims()) {
    throw Error(ErrorCode::Incompatible, "sample arity does not match histogram dimensionality");
  }
  if (sample.size() == 1) {
    accumulate(sample[0]);
  } else {
    accumulate(sample[0], sample[1]);
  }
}

double MergedPdf::total_mass() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

RegionalHistogram add_same_edges(const RegionalHistogram& a, const RegionalHistogram& b) {
  if (a.var_ids != b.var_ids || a.edges != b.edges || a.counts.size() != b.counts.size()) {
    throw Error(ErrorCode::EdgesMismatch, "histograms do not share variables and edges");
  }
  RegionalHistogram r = a;
  for (std::size_t i = 0; i < r.counts.size(); ++i) r.counts[i] += b.counts[i];
  r.out_of_range += b.out_of_range;
  r.invalid += b.invalid;
  r.sample_count += b.sample_count;
  for (std::size_t d = 0; d < r.stats.size(); ++d) r.stats[d] = combine(a.stats[d], b.stats[d]);
  return r;
}

namespace {

template <typename Count>
std::vector<double> marginal(const std::vector<BinEdges>& edges, const std::vector<Count>& counts,
                             std::size_t axis) {
  if (axis >= edges.size()) {
    throw Error(ErrorCode::UnknownVariable, "axis " + std::to_string(axis) + " not present");
  }
  std::vector<double> m(edges[axis].nbins, 0.0);
  if (edges.size() == 1) {
    for (std::size_t i = 0; i < counts.size(); ++i) m[i] = static_cast<double>(counts[i]);
    return m;
  }
  const std::size_t n0 = edges[0].nbins;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const std::size_t i = axis == 0 ? k % n0 : k / n0;
    m[i] += static_cast<double>(counts[k]);
  }
  return m;
}

double prorated_mass(const BinEdges& e, const std::vector<double>& m, double lo, double hi) {
  double mass = 0.0;
  for (std::uint32_t i = 0; i < e.nbins; ++i) {
    if (m[i] == 0.0) continue;
    const double blo = e.lower(i);
    const double bhi = e.upper(i);
    if (lo <= blo && bhi <= hi) {
      mass += m[i];
      continue;
    }
    const double ov = std::min(hi, bhi) - std::max(lo, blo);
    if (ov > 0.0) mass += m[i] * ov / (bhi - blo);
  }
  return mass;
}

template <typename Count>
double mass_in_range_impl(const std::vector<BinEdges>& edges, const std::vector<Count>& counts,
                          std::size_t axis, double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidRange, "lo must not exceed hi");
  const auto m = marginal(edges, counts, axis);
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  return std::clamp(prorated_mass(edges[axis], m, lo, hi) / total, 0.0, 1.0);
}

template <typename Count>
Moments binned_moments(const std::vector<BinEdges>& edges, const std::vector<Count>& counts,
                       std::size_t axis) {
  const auto m = marginal(edges, counts, axis);
  double w = 0.0;
  double s = 0.0;
  double s2 = 0.0;
  for (std::uint32_t i = 0; i < edges[axis].nbins; ++i) {
    const double c = edges[axis].center(i);
    w += m[i];
    s += m[i] * c;
    s2 += m[i] * c * c;
  }
  if (!(w > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  const double mean = s / w;
  return {mean, std::max(0.0, s2 / w - mean * mean)};
}

Moments exact_moments(const std::vector<VariableStats>& stats, std::size_t axis) {
  if (axis >= stats.size()) {
    throw Error(ErrorCode::UnknownVariable, "axis " + std::to_string(axis) + " not present");
  }
  const auto& st = stats[axis];
  if (st.count == 0) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  return {st.mean(), st.variance()};
}

}  // namespace

double mass_in_range(const RegionalHistogram& h, std::size_t axis, double lo, double hi) {
  return mass_in_range_impl(h.edges, h.counts, axis, lo, hi);
}

double mass_in_range(const MergedPdf& m, std::size_t axis, double lo, double hi) {
  return mass_in_range_impl(m.edges, m.counts, axis, lo, hi);
}

Moments moments(const RegionalHistogram& h, std::size_t axis, MomentMode mode) {
  if (h.sample_count == 0) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  return mode == MomentMode::Exact ? exact_moments(h.stats, axis)
                                   : binned_moments(h.edges, h.counts, axis);
}

Moments moments(const MergedPdf& m, std::size_t axis, MomentMode mode) {
  if (m.sample_count == 0) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  return mode == MomentMode::Exact ? exact_moments(m.stats, axis)
                                   : binned_moments(m.edges, m.counts, axis);
}

MaxBin max_bin(const RegionalHistogram& h, std::span<const AxisWindow> windows) {
  if (h.sample_count == 0) throw Error(ErrorCode::EmptyHistogram, "histogram holds no samples");
  const std::size_t nd = h.ndims();
  const std::uint32_t n0 = h.edges[0].nbins;
  auto inside = [&](std::size_t axis, std::uint32_t i) {
    if (axis >= windows.size() || !windows[axis]) return true;
    const double c = h.edges[axis].center(i);
    return c >= windows[axis]->first && c <= windows[axis]->second;
  };
  std::optional<std::uint64_t> best;
  for (std::uint64_t k = 0; k < h.counts.size(); ++k) {
    const auto i = static_cast<std::uint32_t>(nd == 1 ? k : k % n0);
    const auto j = static_cast<std::uint32_t>(nd == 1 ? 0 : k / n0);
    if (!inside(0, i) || (nd == 2 && !inside(1, j))) continue;
    if (!best || h.counts[k] > h.counts[*best]) best = k;
  }
  if (!best) throw Error(ErrorCode::EmptySearchWindow, "no bin center inside the window");
  MaxBin r;
  r.linear_index = *best;
  r.index = {static_cast<std::uint32_t>(nd == 1 ? *best : *best % n0),
             static_cast<std::uint32_t>(nd == 1 ? 0 : *best / n0)};
  r.count = static_cast<double>(h.counts[*best]);
  for (std::size_t d = 0; d < nd; ++d) {
    r.ranges.emplace_back(h.edges[d].lower(r.index[d]), h.edges[d].upper(r.index[d]));
  }
  return r;
}

MergedPdf to_merged(const RegionalHistogram& h) {
  MergedPdf m;
  m.var_ids = h.var_ids;
  m.edges = h.edges;
  m.counts.assign(h.counts.begin(), h.counts.end());
  m.out_of_range = h.out_of_range;
  m.invalid = h.invalid;
  m.sample_count = h.sample_count;
  m.stats = h.stats;
  for (auto& s : m.stats) {
    s.q1.reset();
    s.q3.reset();
  }
  m.source_region_count = 1;
  return m;
}

}  // namespace regsum
