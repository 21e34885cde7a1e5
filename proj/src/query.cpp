#include "regsum/query.hpp"

#include <algorithm>
#include <string>

#include "regsum/error.hpp"

namespace regsum {

Predicate make_not(Predicate p) { return Predicate{Not{std::make_shared<const Predicate>(std::move(p))}}; }
Predicate make_and(std::vector<Predicate> args) { return Predicate{And{std::move(args)}}; }
Predicate make_or(std::vector<Predicate> args) { return Predicate{Or{std::move(args)}}; }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_range(double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidPredicate, "predicate range needs lo <= hi");
}

}  // namespace

void validate(const Predicate& p) {
  std::visit(Overloaded{
                 [](const MassInRange& m) {
                   check_range(m.lo, m.hi);
                   if (!(m.min_mass >= 0.0 && m.min_mass <= 1.0)) {
                     throw Error(ErrorCode::InvalidPredicate, "min_mass must lie in [0, 1]");
                   }
                 },
                 [](const MaxBinIn& m) { check_range(m.lo, m.hi); },
                 [](const NonEmpty&) {},
                 [](const And& a) {
                   if (a.args.empty()) throw Error(ErrorCode::InvalidPredicate, "and needs operands");
                   for (const auto& x : a.args) validate(x);
                 },
                 [](const Or& o) {
                   if (o.args.empty()) throw Error(ErrorCode::InvalidPredicate, "or needs operands");
                   for (const auto& x : o.args) validate(x);
                 },
                 [](const Not& n) {
                   if (!n.arg) throw Error(ErrorCode::InvalidPredicate, "not needs an operand");
                   validate(*n.arg);
                 },
             },
             p.node);
}

std::vector<std::uint64_t> rebin_counts(std::span<const std::uint64_t> counts,
                                        std::span<const std::uint32_t> nbins, std::uint32_t lod) {
  if (lod == 0) throw Error(ErrorCode::IndexOutOfRange, "level of detail must be >= 1");
  const std::uint32_t n0 = nbins[0];
  const std::uint32_t g0 = (n0 + lod - 1) / lod;
  if (nbins.size() == 1) {
    std::vector<std::uint64_t> out(g0, 0);
    for (std::uint32_t i = 0; i < n0; ++i) out[i / lod] += counts[i];
    return out;
  }
  const std::uint32_t n1 = nbins[1];
  const std::uint32_t g1 = (n1 + lod - 1) / lod;
  std::vector<std::uint64_t> out(std::size_t{g0} * g1, 0);
  for (std::uint32_t j = 0; j < n1; ++j) {
    for (std::uint32_t i = 0; i < n0; ++i) {
      out[i / lod + std::size_t{g0} * (j / lod)] += counts[i + std::size_t{n0} * j];
    }
  }
  return out;
}

Dataset::Dataset(PdfStore store) : store_(std::move(store)) {
  const auto& meta = store_.meta;
  const std::uint32_t nregions = meta.grid.region_count();
  for (const auto& ts : store_.timesteps) {
    if (ts.regions.size() != nregions) {
      throw Error(ErrorCode::MalformedFile, "timestep does not cover every region");
    }
  }
  totals_.resize(meta.configs.size());
  for (std::size_t c = 0; c < meta.configs.size(); ++c) {
    const std::size_t nd = meta.configs[c].ndims();
    totals_[c].assign(nd, std::vector<AxisTotals>(store_.timesteps.size()));
    for (std::size_t t = 0; t < store_.timesteps.size(); ++t) {
      for (const auto& rs : store_.timesteps[t].regions) {
        const auto& h = rs.per_config.at(c);
        for (std::size_t d = 0; d < nd; ++d) {
          totals_[c][d][t].sum += h.stats[d].sum;
          totals_[c][d][t].count += h.stats[d].count;
        }
      }
    }
  }
}

Dataset Dataset::load(const std::string& path) { return Dataset(read_pdf_store(path)); }

void Dataset::check_key(std::size_t t, std::size_t config) const {
  if (t >= store_.timesteps.size()) {
    throw Error(ErrorCode::UnknownTimestep, "timestep " + std::to_string(t) + " of " +
                                               std::to_string(store_.timesteps.size()));
  }
  if (config >= store_.meta.configs.size()) {
    throw Error(ErrorCode::InvalidConfig, "config " + std::to_string(config) + " of " +
                                             std::to_string(store_.meta.configs.size()));
  }
}

const RegionalHistogram& Dataset::histogram(std::size_t t, std::size_t config, RegionId r) const {
  check_key(t, config);
  if (!grid().valid(r)) throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
  return store_.timesteps[t].regions[r.value].per_config[config];
}

std::size_t Dataset::axis_of(std::size_t config, std::string_view var) const {
  const auto& meta = store_.meta;
  if (config >= meta.configs.size()) {
    throw Error(ErrorCode::InvalidConfig, "config " + std::to_string(config));
  }
  const auto id = find_variable(meta.variables, var);
  if (id) {
    const auto& ids = meta.configs[config].var_ids;
    for (std::size_t d = 0; d < ids.size(); ++d) {
      if (ids[d] == *id) return d;
    }
  }
  throw Error(ErrorCode::UnknownVariable,
              "variable '" + std::string(var) + "' is not an axis of config " + std::to_string(config));
}

std::vector<char> Dataset::eval_mask(std::size_t t, std::size_t config, const Predicate& p) const {
  const auto& regions = store_.timesteps[t].regions;
  const std::size_t n = regions.size();
  std::vector<char> mask(n, 0);
  std::visit(
      Overloaded{
          [&](const MassInRange& m) {
            const std::size_t axis = axis_of(config, m.var);
            for (std::size_t r = 0; r < n; ++r) {
              const auto& h = regions[r].per_config[config];
              if (h.sample_count == 0) continue;
              mask[r] = mass_in_range(h, axis, m.lo, m.hi) >= m.min_mass;
            }
          },
          [&](const MaxBinIn& m) {
            const std::size_t axis = axis_of(config, m.var);
            std::vector<AxisWindow> window(axis + 1);
            window[axis] = std::make_pair(m.lo, m.hi);
            for (std::size_t r = 0; r < n; ++r) {
              const auto& h = regions[r].per_config[config];
              if (h.sample_count == 0) continue;
              const MaxBin best = max_bin(h);
              const auto& e = h.edges[axis];
              const double c = e.center(best.index[axis]);
              // The restricted search finds the global maximum iff the
              // global maximum's bin center lies in the window.
              mask[r] = c >= m.lo && c <= m.hi;
            }
          },
          [&](const NonEmpty&) {
            for (std::size_t r = 0; r < n; ++r) mask[r] = regions[r].per_config[config].sample_count > 0;
          },
          [&](const And& a) {
            std::fill(mask.begin(), mask.end(), 1);
            for (const auto& x : a.args) {
              const auto sub = eval_mask(t, config, x);
              for (std::size_t r = 0; r < n; ++r) mask[r] = mask[r] && sub[r];
            }
          },
          [&](const Or& o) {
            for (const auto& x : o.args) {
              const auto sub = eval_mask(t, config, x);
              for (std::size_t r = 0; r < n; ++r) mask[r] = mask[r] || sub[r];
            }
          },
          [&](const Not& x) {
            const auto sub = eval_mask(t, config, *x.arg);
            for (std::size_t r = 0; r < n; ++r) mask[r] = !sub[r];
          },
      },
      p.node);
  return mask;
}

Selection Dataset::evaluate(std::size_t t, std::size_t config, const Predicate& p) const {
  check_key(t, config);
  validate(p);
  const auto mask = eval_mask(t, config, p);
  Selection sel;
  sel.timestep = t;
  sel.config = config;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (mask[r]) sel.regions.push_back(RegionId{static_cast<std::uint32_t>(r)});
  }
  return sel;
}

MergeResult Dataset::merge_selection(const Selection& sel) const {
  check_key(sel.timestep, sel.config);
  if (sel.regions.empty()) throw Error(ErrorCode::EmptySelection, "no regions selected");
  std::vector<const RegionalHistogram*> hs;
  hs.reserve(sel.regions.size());
  for (RegionId r : sel.regions) hs.push_back(&histogram(sel.timestep, sel.config, r));
  MergeResult out;
  out.pdf = merge_general(std::span<const RegionalHistogram* const>(hs));
  const auto& cfg = store_.meta.configs[sel.config];
  for (std::size_t d = 0; d < out.pdf.ndims(); ++d) {
    const auto& s = out.pdf.stats[d];
    AxisStats a;
    a.var = store_.meta.variables.at(cfg.var_ids[d]).name;
    a.count = s.count;
    if (s.count > 0) {
      a.mean = s.mean();
      a.variance = s.variance();
      a.min = s.min;
      a.max = s.max;
    }
    out.stats.push_back(std::move(a));
  }
  return out;
}

std::vector<TimelineEntry> Dataset::timeline(std::string_view var) const {
  const auto& meta = store_.meta;
  const auto id = find_variable(meta.variables, var);
  if (!id) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(var) + "'");
  std::optional<std::pair<std::size_t, std::size_t>> pick;
  for (std::size_t c = 0; c < meta.configs.size(); ++c) {
    const auto& ids = meta.configs[c].var_ids;
    for (std::size_t d = 0; d < ids.size(); ++d) {
      if (ids[d] != *id) continue;
      if (!pick || (!meta.configs[c].condition && meta.configs[pick->first].condition)) pick = {{c, d}};
    }
  }
  if (!pick) {
    throw Error(ErrorCode::UnknownVariable, "variable '" + std::string(var) + "' is not binned by any config");
  }
  std::vector<TimelineEntry> out;
  const auto& tot = totals_[pick->first][pick->second];
  for (std::size_t t = 0; t < store_.timesteps.size(); ++t) {
    TimelineEntry e;
    e.timestep = t;
    e.time = store_.timesteps[t].time;
    e.count = tot[t].count;
    if (tot[t].count > 0) e.mean = tot[t].sum / static_cast<double>(tot[t].count);
    out.push_back(e);
  }
  return out;
}

SliceView Dataset::slice(std::size_t t, std::size_t config, Axis axis, std::uint32_t index,
                         std::uint32_t lod) const {
  check_key(t, config);
  const auto a = static_cast<std::size_t>(axis);
  const Index3 counts = grid().region_counts();
  if (a > 2 || index >= counts[a]) {
    throw Error(ErrorCode::IndexOutOfRange, "slice index " + std::to_string(index) + " outside " +
                                                std::to_string(a < 3 ? counts[a] : 0) + " regions");
  }
  if (lod == 0) throw Error(ErrorCode::IndexOutOfRange, "level of detail must be >= 1");
  SliceView v;
  v.axis = axis;
  v.index = index;
  v.lod = lod;
  switch (axis) {
    case Axis::X: v.horizontal = Axis::Y; v.vertical = Axis::Z; break;
    case Axis::Y: v.horizontal = Axis::X; v.vertical = Axis::Z; break;
    case Axis::Z: v.horizontal = Axis::X; v.vertical = Axis::Y; break;
  }
  const auto ha = static_cast<std::size_t>(v.horizontal);
  const auto va = static_cast<std::size_t>(v.vertical);
  v.width = counts[ha];
  v.height = counts[va];
  v.thumbnails.reserve(std::size_t{v.width} * v.height);
  for (std::uint32_t row = 0; row < v.height; ++row) {
    for (std::uint32_t col = 0; col < v.width; ++col) {
      Index3 ri{};
      ri[a] = index;
      ri[ha] = col;
      ri[va] = row;
      const RegionId id = grid().linearize(ri);
      const auto& h = store_.timesteps[t].regions[id.value].per_config[config];
      Thumbnail th;
      th.region = id;
      th.col = col;
      th.row = row;
      std::vector<std::uint32_t> src_bins;
      for (const auto& e : h.edges) {
        src_bins.push_back(e.nbins);
        std::vector<double> edges;
        for (std::uint32_t i = 0; i < e.nbins; i += lod) edges.push_back(e.lower(i));
        edges.push_back(e.max);
        th.nbins.push_back(static_cast<std::uint32_t>(edges.size() - 1));
        th.bin_edges.push_back(std::move(edges));
      }
      th.counts = rebin_counts(h.counts, src_bins, lod);
      th.sample_count = h.sample_count;
      v.thumbnails.push_back(std::move(th));
    }
  }
  return v;
}

}  // namespace regsum
