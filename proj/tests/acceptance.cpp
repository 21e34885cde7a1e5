// Acceptance checks on synthetic data. Prints one PASS/FAIL line per check
// with the measured figures and exits non-zero if any check fails.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <string>

#include "regsum/binary_io.hpp"
#include "regsum/error.hpp"
#include "regsum/particles.hpp"
#include "regsum/query.hpp"
#include "regsum/store.hpp"
#include "regsum/summarizer.hpp"
#include "regsum/synth.hpp"
#include "support.hpp"

using namespace regsum;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

FieldBlock whole_block(const Synthesizer& s, std::size_t t) {
  const auto d = s.spec().dims;
  FieldBlock b;
  b.extents = {Extent{0, d[0]}, Extent{0, d[1]}, Extent{0, d[2]}};
  b.values = s.fields(t);
  return b;
}

long double pooled_variance(const std::vector<double>& xs) {
  long double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  long double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / xs.size();
}

Outcome summarization_oracle() {
  const Synthesizer s({{64, 64, 64}, 1, 7, 0});
  const auto grid = RegionGrid::build({64, 64, 64}, {4, 4, 4});
  const std::vector<PdfConfig> configs{
      {{kHeatRelease}, BinningStrategy::sturges(), std::nullopt},
      {{kHeatRelease}, BinningStrategy::scott(), std::nullopt},
      {{kHeatRelease}, BinningStrategy::freedman_diaconis(), std::nullopt},
      {{kCh2o}, BinningStrategy::sturges(), std::nullopt},
      {{kCh2o}, BinningStrategy::scott(), std::nullopt},
      {{kCh2o}, BinningStrategy::freedman_diaconis(), std::nullopt},
  };
  const auto block = whole_block(s, 0);
  const auto start = Clock::now();
  const auto summary = summarize_timestep(0.0, std::span(&block, 1), grid, configs);
  const double ms = ms_since(start);

  std::size_t mismatched = 0, compared = 0;
  for (std::uint32_t r = 0; r < grid.region_count(); ++r) {
    const auto box = grid.region_box(RegionId{r});
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto& h = summary.at(RegionId{r}, c);
      // Edges come from the region's own samples, recomputed independently.
      const auto xs = testing::box_samples(block, box, configs[c].var_ids[0]);
      const auto edges = edges_from_strategy(compute_stats(xs, true), configs[c].strategy);
      const bool same_edges = h.edges[0] == edges;
      const auto brute = testing::brute_counts(block, box, configs[c], std::span(&edges, 1));
      ++compared;
      if (!same_edges || h.counts != brute) ++mismatched;
    }
  }
  return {mismatched == 0 && ms < 10000.0,
          fmt("%zu region histograms (64 regions x 3 strategies x 2 variables), %zu mismatches, summarize %.0f ms "
              "(budget 10000 ms)",
              compared, mismatched, ms)};
}

Outcome decomposition_invariance() {
  const testing::TempDir dir;
  const SynthSpec spec{{64, 64, 64}, 2, 7, 0};
  generate(spec, dir.file("f.rfld"), dir.file("p.rprt"));
  const auto reader = RawFieldReader::open(dir.file("f.rfld"));
  const auto grid = RegionGrid::build(spec.dims, {4, 4, 4});
  const std::vector<PdfConfig> configs{
      {{kHeatRelease}, BinningStrategy::freedman_diaconis(), std::nullopt},
      {{kHeatRelease, kCh2o}, BinningStrategy::scott(32), std::nullopt},
      {{kCh2o}, BinningStrategy::sturges(), Condition{kAlphaClass, 0.0, 1.0}},
  };
  std::size_t equal = 0;
  for (std::size_t t = 0; t < spec.timesteps; ++t) {
    const auto whole = reader.read_timestep(t);
    const auto single = summarize_timestep(reader.time(t), std::span(&whole, 1), grid, configs);
    std::vector<TimestepSummary> parts;
    for (const auto& box : aligned_blocks(grid, {2, 2, 2})) {
      parts.push_back(summarize_block(reader.time(t), reader.read_block(t, box), grid, configs));
    }
    if (merge_partials(parts) == single) ++equal;
  }
  return {equal == spec.timesteps,
          fmt("%zu/%u timesteps structurally equal (8 streamed blocks vs one block, 3 configs)", equal, spec.timesteps)};
}

Outcome extraction_equivalence() {
  const SynthSpec spec{{32, 32, 32}, 1, 7, 100000};
  const Synthesizer s(spec);
  const auto grid = RegionGrid::build(spec.dims, {8, 8, 8});
  const std::vector<PdfConfig> configs{
      {{kHeatRelease}, BinningStrategy::freedman_diaconis(), std::nullopt},
      {{kCh2o}, BinningStrategy::scott(), std::nullopt},
  };
  const auto block = whole_block(s, 0);
  PdfStore store{{grid, Synthesizer::variables(), configs}, {}};
  store.timesteps.push_back(summarize_timestep(0.0, std::span(&block, 1), grid, configs));
  const Dataset ds(std::move(store));

  const auto raw = s.particles().at(0);
  auto sorted = sort_and_index(raw, grid, s.axes());
  ParticleStore ps{{grid.region_counts(), Synthesizer::variables()}, {}};
  ps.timesteps.push_back({0.0, sorted.records, sorted.table});
  auto source = std::make_shared<CountingSource>(std::make_shared<MemorySource>(encode_particle_store(ps)));
  const ParticleStoreReader reader(source);

  std::mt19937_64 rng(2024);
  std::size_t equal = 0, nonempty = 0;
  double worst_ratio = 0.0;
  bool bytes_ok = true;
  std::uint64_t total_selected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = testing::uniform(rng, -3e10, 0), b = testing::uniform(rng, -3e10, 0);
    Predicate p{MassInRange{"heat_release", std::min(a, b), std::max(a, b), testing::uniform(rng, 0.0, 0.6)}};
    if (trial % 3 == 1) p = make_or({p, Predicate{MaxBinIn{"ch2o", 0.0, testing::uniform(rng, 0, 1e-3)}}});
    if (trial % 3 == 2) p = make_and({p, make_not(Predicate{MassInRange{"ch2o", 0.0, 1e-4, 0.5}})});
    const std::size_t config = trial % 3 == 0 ? 0 : 1;
    if (config == 1) p = Predicate{MassInRange{"ch2o", 0.0, testing::uniform(rng, 0, 6e-4), testing::uniform(rng, 0, 1)}};
    const auto sel = ds.evaluate(0, config, p);

    std::vector<RefineRange> refine;
    if (trial % 2 == 0) refine.push_back({kCh2o, 0.0, testing::uniform(rng, 0, 1e-3)});
    if (trial % 5 == 0) refine.push_back({kAlphaClass, 0.0, 1.0});

    source->reset();
    const auto got = extract(reader, 0, sel.regions, refine);
    const std::uint64_t bytes = source->bytes_read();

    std::set<std::uint64_t> want, have;
    for (const auto& q : raw) {
      const auto r = grid.region_of_point(s.axes(), q.pos);
      if (!r || !std::binary_search(sel.regions.begin(), sel.regions.end(), *r)) continue;
      bool keep = true;
      for (const auto& f : refine) keep = keep && f.admits(q);
      if (keep) want.insert(q.id);
    }
    for (const auto& q : got) have.insert(q.id);
    if (want == have && have.size() == got.size()) ++equal;
    if (!got.empty()) ++nonempty;

    std::uint64_t selected = 0;
    for (RegionId r : sel.regions) selected += sorted.table.counts[r.value];
    total_selected += selected;
    const double budget = 1.01 * static_cast<double>(selected * reader.record_size());
    if (static_cast<double>(bytes) > budget) bytes_ok = false;
    if (selected > 0) worst_ratio = std::max(worst_ratio, static_cast<double>(bytes) / (selected * reader.record_size()));
  }
  return {equal == 100 && bytes_ok && nonempty > 10,
          fmt("%zu/100 id sets equal (%zu non-empty, %" PRIu64 " particles selected in total); worst bytes read / "
              "(selected x record size) = %.4f (budget 1.01)",
              equal, nonempty, total_selected, worst_ratio)};
}

Outcome merge_properties() {
  std::mt19937_64 rng(99);
  // Identical edges: merged counts equal the element-wise sum.
  std::size_t exact_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto edges = BinEdges::make(-1, 1, 1 + rng() % 50);
    std::vector<RegionalHistogram> hs;
    std::vector<std::uint64_t> sum(edges.nbins, 0);
    for (std::size_t k = 0; k < 2 + rng() % 6; ++k) {
      RegionalHistogram h(0, edges);
      for (std::size_t i = 0; i < rng() % 500; ++i) h.accumulate(testing::uniform(rng, -1, 1));
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h.counts[i];
      hs.push_back(std::move(h));
    }
    const auto m = merge_general(hs);
    bool ok = m.edges.empty() || m.edges[0] == edges;
    for (std::size_t i = 0; ok && i < sum.size(); ++i) ok = m.counts[i] == static_cast<double>(sum[i]);
    if (ok) ++exact_ok;
  }

  double worst_mass = 0, worst_mean = 0, worst_var = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool two_d = trial % 4 == 3;
    std::vector<RegionalHistogram> hs;
    std::vector<double> pooled;
    const double shift = testing::uniform(rng, -50, 50);
    for (std::size_t k = 0; k < 2 + rng() % 8; ++k) {
      const double lo = shift + testing::uniform(rng, -10, 10);
      const double hi = lo + testing::uniform(rng, 0.1, 20);
      const auto nb = static_cast<std::uint32_t>(1 + rng() % 64);
      RegionalHistogram h = two_d ? RegionalHistogram(0, 1, BinEdges::make(lo, hi, nb), BinEdges::make(0, 1, 1 + nb / 3))
                                  : RegionalHistogram(0, BinEdges::make(lo, hi, nb));
      for (std::size_t i = 1 + rng() % 400; i > 0; --i) {
        const double x = testing::uniform(rng, lo, hi);
        if (two_d) {
          h.accumulate(x, testing::uniform(rng, 0, 1));
        } else {
          h.accumulate(x);
        }
        pooled.push_back(x);
      }
      hs.push_back(std::move(h));
    }
    const auto m = merge_general(hs);
    const double mass = std::accumulate(hs.begin(), hs.end(), 0.0, [](double acc, const RegionalHistogram& h) {
      return acc + static_cast<double>(h.sample_count);
    });
    long double mean = 0;
    for (double x : pooled) mean += x;
    mean /= pooled.size();
    const auto mo = moments(m, 0, MomentMode::Exact);
    worst_mass = std::max(worst_mass, testing::rel_err(m.total_mass(), mass));
    worst_mean = std::max(worst_mean, testing::rel_err(mo.mean, static_cast<double>(mean)));
    worst_var = std::max(worst_var, testing::rel_err(mo.variance, static_cast<double>(pooled_variance(pooled))));
  }
  return {exact_ok == 100 && worst_mass <= 1e-9 && worst_mean <= 1e-12 && worst_var <= 1e-12,
          fmt("identical-edge sums exact %zu/100; 1000 heterogeneous merges: worst mass rel err %.2e (tol 1e-9), "
              "mean %.2e, variance %.2e (tol 1e-12)",
              exact_ok, worst_mass, worst_mean, worst_var)};
}

Outcome binning_formulas() {
  const auto sturges = sturges_bins(1024);
  VariableStats fd;
  fd.count = 8;
  fd.q1 = 0.0;
  fd.q3 = 1.0;
  const double h_fd = freedman_diaconis_width(fd);
  // Population standard deviation 2 over 1000 samples.
  VariableStats sc;
  sc.count = 1000;
  sc.sum = 0.0;
  sc.sum_sq = 4.0 * 1000;
  const double h_scott = scott_width(sc);
  const double scott_err = std::fabs(h_scott - 0.698);
  const double ulp = std::nextafter(0.698, 1.0) - 0.698;
  return {sturges == 11 && h_fd == 1.0 && scott_err <= 1e-15,
          fmt("Sturges(1024) = %u, FD(IQR=1, n=8) = %.17g, Scott(s=2, n=1000) = %.17g (|h - 0.698| = %.1e, %.0f ulp; "
              "0.698 has no exact binary64 form, tol 1e-15)",
              sturges, h_fd, h_scott, scott_err, scott_err / ulp)};
}

Outcome conditional_binning() {
  const Synthesizer s({{64, 64, 64}, 1, 11, 0});
  const auto grid = RegionGrid::build({64, 64, 64}, {4, 4, 4});
  const std::vector<PdfConfig> configs{
      {{kCh2o}, BinningStrategy::scott(), Condition{kAlphaClass, 0.0, 1.0}},
      {{kHeatRelease}, BinningStrategy::freedman_diaconis(), Condition{kAlphaClass, 1.0, 1.0}},
      {{kHeatRelease, kCh2o}, BinningStrategy::sturges(32), Condition{kAlphaClass, -1.0, 0.0}},
  };
  const auto block = whole_block(s, 0);
  const auto summary = summarize_timestep(0.0, std::span(&block, 1), grid, configs);
  std::size_t equal = 0, compared = 0, nonempty = 0;
  for (std::uint32_t r = 0; r < grid.region_count(); ++r) {
    const auto box = grid.region_box(RegionId{r});
    const auto cls = testing::box_samples(block, box, kAlphaClass);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto& cfg = configs[c];
      std::vector<std::vector<double>> kept(cfg.var_ids.size());
      for (std::size_t d = 0; d < cfg.var_ids.size(); ++d) {
        const auto xs = testing::box_samples(block, box, cfg.var_ids[d]);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (cfg.condition->admits(cls[i])) kept[d].push_back(xs[i]);
        }
      }
      ++compared;
      const auto& h = summary.at(RegionId{r}, c);
      if (kept[0].empty()) {
        if (h.sample_count == 0) ++equal;
        continue;
      }
      ++nonempty;
      std::vector<BinEdges> edges;
      for (const auto& k : kept) edges.push_back(edges_from_strategy(compute_stats(k, true), cfg.strategy));
      RegionalHistogram plain = edges.size() == 1 ? RegionalHistogram(cfg.var_ids[0], edges[0])
                                                  : RegionalHistogram(cfg.var_ids[0], cfg.var_ids[1], edges[0], edges[1]);
      for (std::size_t i = 0; i < kept[0].size(); ++i) {
        if (edges.size() == 1) {
          plain.accumulate(kept[0][i]);
        } else {
          plain.accumulate(kept[0][i], kept[1][i]);
        }
      }
      if (h == plain) ++equal;
    }
  }
  return {equal == compared && nonempty > 0,
          fmt("%zu/%zu conditioned region histograms equal the unconditioned pass over the filtered subset (%zu "
              "non-empty)",
              equal, compared, nonempty)};
}

Outcome data_reduction() {
  const testing::TempDir dir;
  const Synthesizer s({{128, 128, 128}, 1, 7, 0});
  auto fields = s.fields(0);
  fields.pop_back();  // heat_release and ch2o only
  const auto vars = Synthesizer::variables();
  const std::vector<VariableInfo> two{vars[kHeatRelease], vars[kCh2o]};
  {
    RawFieldWriter w(dir.file("f.rfld"), s.axes(), two);
    w.append(0.0, fields);
    w.finish();
  }
  const std::uint64_t raw_bytes = std::uint64_t{128} * 128 * 128 * 2 * sizeof(double);

  const auto grid = RegionGrid::build({128, 128, 128}, {8, 8, 8});
  const std::vector<PdfConfig> configs{{{0, 1}, BinningStrategy::freedman_diaconis(32), std::nullopt}};
  FieldBlock b;
  b.extents = {Extent{0, 128}, Extent{0, 128}, Extent{0, 128}};
  b.values = std::move(fields);
  PdfStore store{{grid, two, configs}, {}};
  store.timesteps.push_back(summarize_timestep(0.0, std::span(&b, 1), grid, configs));
  write_pdf_store(dir.file("s.rpdf"), store);
  const auto pdf_bytes = std::filesystem::file_size(dir.file("s.rpdf"));
  const auto rfld_bytes = std::filesystem::file_size(dir.file("f.rfld"));
  std::uint32_t widest = 0;
  for (const auto& r : store.timesteps[0].regions) {
    widest = std::max({widest, r.per_config[0].edges[0].nbins, r.per_config[0].edges[1].nbins});
  }
  const double ratio = static_cast<double>(pdf_bytes) / static_cast<double>(raw_bytes);
  return {ratio <= 0.25 && widest <= 32,
          fmt("raw %" PRIu64 " B/step (RFLD file %ju B), RPDF %ju B at 8x8x8 regions, widest axis %u bins: ratio "
              "%.2f%% (budget 25%%)",
              raw_bytes, static_cast<std::uintmax_t>(rfld_bytes), static_cast<std::uintmax_t>(pdf_bytes), widest,
              100.0 * ratio)};
}

Outcome responsiveness() {
  const Synthesizer s({{64, 64, 64}, 1, 7, 0});
  const auto grid = RegionGrid::build({64, 64, 64}, {32, 32, 32});
  const std::vector<PdfConfig> configs{
      {{kHeatRelease}, BinningStrategy::freedman_diaconis(), std::nullopt},
      {{kHeatRelease, kCh2o}, BinningStrategy::freedman_diaconis(32), std::nullopt},
  };
  const auto block = whole_block(s, 0);
  PdfStore store{{grid, Synthesizer::variables(), configs}, {}};
  store.timesteps.push_back(summarize_timestep(0.0, std::span(&block, 1), grid, configs));
  const testing::TempDir dir;
  write_pdf_store(dir.file("s.rpdf"), store);
  const auto ds = Dataset::load(dir.file("s.rpdf"));

  const auto p = make_and({Predicate{MassInRange{"heat_release", -3e10, -1e9, 0.3}},
                           make_not(Predicate{MaxBinIn{"ch2o", 0.0, 1e-5}})});
  (void)ds.evaluate(0, 1, p);  // warm
  auto start = Clock::now();
  const auto sel = ds.evaluate(0, 1, p);
  const double predicate_ms = ms_since(start);

  Selection slice{0, 1, {}};
  for (std::uint32_t y = 0; y < 32; ++y) {
    for (std::uint32_t x = 0; x < 32; ++x) slice.regions.push_back(grid.linearize({x, y, 16}));
  }
  std::sort(slice.regions.begin(), slice.regions.end());
  (void)ds.merge_selection(slice);  // warm
  start = Clock::now();
  const auto merged = ds.merge_selection(slice);
  const double merge_ms = ms_since(start);
  return {predicate_ms < 100.0 && merge_ms < 500.0,
          fmt("%u regions: predicate %.2f ms (budget 100, %zu selected), full-slice 2D merge of %zu regions %.2f ms "
              "(budget 500)",
              grid.region_count(), predicate_ms, sel.regions.size(), slice.regions.size(), merge_ms)};
}

PdfStore random_pdf_store(std::mt19937_64& rng) {
  const Index3 dims{4 + static_cast<std::uint32_t>(rng() % 8), 4 + static_cast<std::uint32_t>(rng() % 8),
                    4 + static_cast<std::uint32_t>(rng() % 4)};
  const Index3 counts{1 + static_cast<std::uint32_t>(rng() % 4), 1 + static_cast<std::uint32_t>(rng() % 4),
                      1 + static_cast<std::uint32_t>(rng() % 3)};
  const Synthesizer s({dims, 1 + static_cast<std::uint32_t>(rng() % 3), rng(), 0});
  PdfStore store;
  store.meta = {RegionGrid::build(dims, counts), Synthesizer::variables(),
                {{{kHeatRelease}, BinningStrategy::scott(1 + rng() % 64), std::nullopt},
                 {{kHeatRelease, kCh2o}, BinningStrategy::freedman_diaconis(1 + rng() % 32), std::nullopt},
                 {{kCh2o}, BinningStrategy::fixed(1 + rng() % 9), Condition{kAlphaClass, 0.0, 1.0}}}};
  for (std::size_t t = 0; t < s.spec().timesteps; ++t) {
    const auto b = whole_block(s, t);
    store.timesteps.push_back(summarize_timestep(s.time(t), std::span(&b, 1), store.meta.grid, store.meta.configs));
  }
  return store;
}

ParticleStore random_particle_store(std::mt19937_64& rng) {
  const Synthesizer s({{8, 8, 8}, 1 + static_cast<std::uint32_t>(rng() % 3), rng(), rng() % 400});
  const auto grid = RegionGrid::build({8, 8, 8}, {1 + static_cast<std::uint32_t>(rng() % 4), 2, 1});
  ParticleStore store{{grid.region_counts(), Synthesizer::variables()}, {}};
  for (const auto& step : s.particles()) {
    auto sorted = sort_and_index(step, grid, s.axes());
    store.timesteps.push_back({0.0, std::move(sorted.records), std::move(sorted.table)});
  }
  return store;
}

template <typename Store, typename Decode>
std::pair<std::size_t, std::size_t> flip_every_payload_byte(const Store& store, std::size_t header, Decode decode) {
  auto bytes = [&] {
    if constexpr (std::is_same_v<Store, PdfStore>) {
      return encode_pdf_store(store);
    } else {
      return encode_particle_store(store);
    }
  }();
  std::size_t detected = 0;
  for (std::size_t i = header; i < bytes.size(); ++i) {
    const auto saved = bytes[i];
    bytes[i] ^= std::byte{0x10};
    try {
      (void)decode(bytes);
    } catch (const Error&) {
      ++detected;
    }
    bytes[i] = saved;
  }
  return {detected, bytes.size() - header};
}

Outcome format_round_trips() {
  std::mt19937_64 rng(5);
  const testing::TempDir dir;
  std::size_t pdf_ok = 0, prt_ok = 0;
  for (int i = 0; i < 25; ++i) {
    const auto s = random_pdf_store(rng);
    write_pdf_store(dir.file("s.rpdf"), s);
    if (read_pdf_store(dir.file("s.rpdf")) == s && decode_pdf_store(encode_pdf_store(s)) == s) ++pdf_ok;
    const auto p = random_particle_store(rng);
    write_particle_store(dir.file("p.rprt"), p);
    if (read_particle_store(dir.file("p.rprt")) == p && decode_particle_store(encode_particle_store(p)) == p) ++prt_ok;
  }

  const auto pdf = random_pdf_store(rng);
  auto pdf_head = pdf;
  pdf_head.timesteps.clear();
  const auto [pdf_hit, pdf_total] = flip_every_payload_byte(pdf, encode_pdf_store(pdf_head).size(),
                                                            [](const auto& b) { return decode_pdf_store(b); });
  auto prt = random_particle_store(rng);
  while (prt.timesteps.front().records.empty()) prt = random_particle_store(rng);
  auto prt_head = prt;
  prt_head.timesteps.clear();
  const auto [prt_hit, prt_total] = flip_every_payload_byte(prt, encode_particle_store(prt_head).size(),
                                                            [](const auto& b) { return decode_particle_store(b); });
  return {pdf_ok == 25 && prt_ok == 25 && pdf_hit == pdf_total && prt_hit == prt_total,
          fmt("round trips RPDF %zu/25, RPRT %zu/25; single-byte flips detected RPDF %zu/%zu, RPRT %zu/%zu", pdf_ok,
              prt_ok, pdf_hit, pdf_total, prt_hit, prt_total)};
}

}  // namespace

int main() {
  report("summarization-oracle", summarization_oracle);
  report("decomposition-invariance", decomposition_invariance);
  report("extraction-equivalence", extraction_equivalence);
  report("merge-properties", merge_properties);
  report("binning-formulas", binning_formulas);
  report("conditional-binning", conditional_binning);
  report("data-reduction", data_reduction);
  report("responsiveness", responsiveness);
  report("format-round-trips", format_round_trips);
  std::printf("%d of 9 checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}
