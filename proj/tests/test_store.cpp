#include <doctest.h>

#include <cstring>
#include <functional>
#include <optional>

#include "regsum/binary_io.hpp"
#include "regsum/error.hpp"
#include "regsum/particles.hpp"
#include "regsum/store.hpp"
#include "support.hpp"

using namespace regsum;

namespace {

PdfStore random_pdf_store(std::uint64_t seed, std::size_t timesteps) {
  std::mt19937_64 rng(seed);
  const Index3 dims{3 + static_cast<std::uint32_t>(rng() % 6), 3 + static_cast<std::uint32_t>(rng() % 6),
                    2 + static_cast<std::uint32_t>(rng() % 5)};
  const Index3 counts{1 + static_cast<std::uint32_t>(rng() % 3), 1 + static_cast<std::uint32_t>(rng() % 3),
                      1 + static_cast<std::uint32_t>(rng() % 2)};
  PdfStore s;
  s.meta.grid = RegionGrid::build(dims, counts);
  s.meta.variables = {{"heat_release", "J/m^3/s"}, {"ch2o", ""}, {"alpha_class", "1"}};
  s.meta.configs = {
      {{0}, BinningStrategy::scott(1 + static_cast<std::uint32_t>(rng() % 64)), std::nullopt},
      {{0, 1}, BinningStrategy::freedman_diaconis(8), std::nullopt},
      {{1}, BinningStrategy::fixed(3), Condition{2, -0.5, 2.0}},
      {{2, 0}, BinningStrategy::sturges(), Condition{1, 10.0, 11.0}},
  };
  for (std::size_t t = 0; t < timesteps; ++t) {
    auto block = testing::random_block(dims, 3, rng());
    block.values[0][0] = std::nan("");
    s.timesteps.push_back(summarize_timestep(0.25 * t, std::span(&block, 1), s.meta.grid, s.meta.configs));
  }
  return s;
}

std::vector<ParticleRecord> random_particles(std::mt19937_64& rng, std::size_t n, std::size_t nvars) {
  std::vector<ParticleRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = rng();
    for (auto& c : out[i].pos) c = testing::uniform(rng, 0.0, 1.0);
    for (std::size_t v = 0; v < nvars; ++v) out[i].values.push_back(static_cast<float>(testing::uniform(rng, -1e3, 1e3)));
  }
  return out;
}

ParticleStore random_particle_store(std::uint64_t seed, std::size_t timesteps) {
  std::mt19937_64 rng(seed);
  const auto axes = RectilinearAxes::uniform({8, 8, 8}, {0, 0, 0}, {1, 1, 1});
  const auto grid = RegionGrid::build({8, 8, 8}, {2, 3, 2});
  ParticleStore s;
  s.header.region_counts = grid.region_counts();
  s.header.variables = {{"a", "u"}, {"b", ""}};
  for (std::size_t t = 0; t < timesteps; ++t) {
    const auto raw = random_particles(rng, rng() % 200, 2);
    auto sorted = sort_and_index(raw, grid, axes);
    s.timesteps.push_back({0.5 * t, std::move(sorted.records), std::move(sorted.table)});
  }
  return s;
}

std::optional<ErrorCode> decode_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("crc32c test vector") {
  const char* s = "123456789";
  const auto bytes = std::as_bytes(std::span(s, 9));
  CHECK(crc32c(bytes) == 0xE3069283u);
  CHECK(crc32c({}) == 0u);
  // Incremental update equals the one-shot value.
  CHECK(crc32c(bytes.subspan(4), crc32c(bytes.first(4))) == 0xE3069283u);
}

TEST_CASE("byte writer and reader are little-endian and bounds-checked") {
  ByteWriter w;
  w.u32(0x01020304);
  w.f64(-2.5);
  w.str16("abc");
  const auto v = w.view();
  CHECK(v[0] == std::byte{0x04});
  CHECK(v[3] == std::byte{0x01});
  ByteReader r(v);
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.f64() == -2.5);
  CHECK(r.str16() == "abc");
  CHECK(decode_error([&] { (void)r.u8(); }) == ErrorCode::TruncatedFile);
}

TEST_CASE("pdf store round trip") {
  testing::TempDir dir;
  const auto store = random_pdf_store(1, 2);
  REQUIRE(store.meta.grid.region_count() >= 1);
  const auto path = dir.file("a.rpdf");
  write_pdf_store(path, store);
  CHECK(read_pdf_store(path) == store);
  CHECK(decode_pdf_store(encode_pdf_store(store)) == store);

  // The streaming writer produces the same bytes.
  const auto path2 = dir.file("b.rpdf");
  {
    PdfStoreWriter w(path2, store.meta);
    for (const auto& t : store.timesteps) w.append(t);
    w.finish();
  }
  CHECK(read_file(path2) == read_file(path));
}

TEST_CASE("pdf store round trip under randomized content") {
  for (std::uint64_t seed = 10; seed < 40; ++seed) {
    const auto store = random_pdf_store(seed, 1 + seed % 3);
    CHECK(decode_pdf_store(encode_pdf_store(store)) == store);
  }
}

TEST_CASE("pdf store header checks") {
  const auto bytes = encode_pdf_store(random_pdf_store(2, 1));
  auto bad_magic = bytes;
  bad_magic[0] = std::byte{'X'};
  CHECK(decode_error([&] { (void)decode_pdf_store(bad_magic); }) == ErrorCode::BadMagic);
  auto bad_version = bytes;
  const std::uint32_t v = 999;
  std::memcpy(bad_version.data() + 4, &v, 4);
  CHECK(decode_error([&] { (void)decode_pdf_store(bad_version); }) == ErrorCode::UnsupportedVersion);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK(decode_error([&] { (void)decode_pdf_store(truncated); }) == ErrorCode::TruncatedFile);
}

TEST_CASE("pdf store detects every single-byte payload flip") {
  auto store = random_pdf_store(3, 1);
  PdfStore header_only = store;
  header_only.timesteps.clear();
  const std::size_t header = encode_pdf_store(header_only).size();
  const auto bytes = encode_pdf_store(store);
  std::size_t crc_hits = 0;
  std::size_t detected = 0;
  const std::size_t payload = bytes.size() - header;
  for (std::size_t i = header; i < bytes.size(); ++i) {
    auto copy = bytes;
    copy[i] ^= std::byte{0x5A};
    const auto code = decode_error([&] { (void)decode_pdf_store(copy); });
    if (code) ++detected;
    if (code == ErrorCode::ChecksumMismatch) ++crc_hits;
  }
  CHECK(detected == payload);
  CHECK(crc_hits > payload / 2);
}

TEST_CASE("particle store round trip") {
  testing::TempDir dir;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto store = random_particle_store(seed, 1 + seed % 3);
    CHECK(decode_particle_store(encode_particle_store(store)) == store);
    const auto path = dir.file("p.rprt");
    write_particle_store(path, store);
    CHECK(read_particle_store(path) == store);
    const auto reader = ParticleStoreReader::open(path);
    CHECK(reader.timestep_count() == store.timesteps.size());
    for (std::size_t t = 0; t < store.timesteps.size(); ++t) {
      CHECK(reader.read_timestep(t) == store.timesteps[t]);
      CHECK(reader.table(t) == store.timesteps[t].table);
    }
  }
}

TEST_CASE("particle store detects every single-byte payload flip") {
  const auto store = random_particle_store(4, 1);
  ParticleStore header_only = store;
  header_only.timesteps.clear();
  const std::size_t header = encode_particle_store(header_only).size();
  const auto bytes = encode_particle_store(store);
  std::size_t detected = 0;
  for (std::size_t i = header; i < bytes.size(); ++i) {
    auto copy = bytes;
    copy[i] ^= std::byte{0x01};
    if (decode_error([&] { (void)decode_particle_store(copy); })) ++detected;
  }
  CHECK(detected == bytes.size() - header);
}

TEST_CASE("region reads touch only that region's records") {
  // One variable: record size 8 + 24 + 4 = 36.
  ParticleStore s;
  s.header.region_counts = {3, 1, 1};
  s.header.variables = {{"v", ""}};
  ParticleTimestep t;
  for (std::uint64_t i = 0; i < 3; ++i) t.records.push_back({i, {0.1 * i, 0, 0}, {static_cast<float>(i)}});
  t.table = {{0, 1, 3}, {1, 2, 0}};
  s.timesteps.push_back(t);
  auto counting = std::make_shared<CountingSource>(std::make_shared<MemorySource>(encode_particle_store(s)), true);
  const ParticleStoreReader reader(counting);
  CHECK(reader.record_size() == 36);
  counting->reset();

  const auto r1 = reader.read_region(0, RegionId{1});
  CHECK(r1.size() == 2);
  CHECK(r1[0].id == 1);
  const auto ranges = counting->ranges();
  REQUIRE(ranges.size() == 1);
  CHECK(ranges[0].offset == reader.records_base(0) + 36);
  CHECK(ranges[0].length == 72);

  counting->reset();
  CHECK(reader.read_region(0, RegionId{2}).empty());
  CHECK(counting->bytes_read() == 0);

  const auto r0 = reader.read_region(0, RegionId{0});
  const auto rr = counting->ranges();
  REQUIRE(rr.size() == 1);
  CHECK(rr[0].offset + rr[0].length <= ranges[0].offset);

  CHECK(decode_error([&] { (void)reader.read_region(0, RegionId{3}); }) == ErrorCode::UnknownRegion);
  CHECK(decode_error([&] { (void)reader.read_region(1, RegionId{0}); }) == ErrorCode::UnknownTimestep);
}

TEST_CASE("read_region_particles opens a file") {
  testing::TempDir dir;
  const auto store = random_particle_store(7, 2);
  const auto path = dir.file("p.rprt");
  write_particle_store(path, store);
  const auto& t1 = store.timesteps[1];
  for (std::uint32_t r = 0; r < store.header.region_count(); ++r) {
    const auto got = read_region_particles(path, 1, RegionId{r});
    const auto first = t1.records.begin() + static_cast<std::ptrdiff_t>(t1.table.offsets[r]);
    CHECK(got == std::vector<ParticleRecord>(first, first + static_cast<std::ptrdiff_t>(t1.table.counts[r])));
  }
}

TEST_CASE("index table validation") {
  CHECK_NOTHROW((ParticleIndexTable{{0, 2, 2}, {2, 0, 3}}.validate(5)));
  CHECK_THROWS_AS((ParticleIndexTable{{0, 1, 2}, {2, 0, 3}}.validate(5)), Error);
  CHECK_THROWS_AS((ParticleIndexTable{{0, 2, 2}, {2, 0, 3}}.validate(6)), Error);
}

TEST_CASE("raw field round trip and block reads") {
  testing::TempDir dir;
  const auto axes = RectilinearAxes({0, 1, 3, 4, 8}, {0, 0.5, 1}, {-1, 0, 1, 2});
  const auto d = axes.dims();
  const std::size_t cells = std::size_t{d[0]} * d[1] * d[2];
  std::vector<std::vector<double>> v0(2, std::vector<double>(cells)), v1 = v0;
  for (std::size_t i = 0; i < cells; ++i) {
    v0[0][i] = static_cast<double>(i);
    v0[1][i] = -static_cast<double>(i) * 0.5;
    v1[0][i] = static_cast<double>(i) + 1000;
    v1[1][i] = 7.0;
  }
  const auto path = dir.file("f.rfld");
  {
    RawFieldWriter w(path, axes, {{"a", "x"}, {"b", "y"}});
    w.append(0.0, v0);
    w.append(2.5, v1);
    w.finish();
  }
  const auto r = RawFieldReader::open(path);
  CHECK(r.header().axes == axes);
  CHECK(r.header().timesteps == 2);
  CHECK(r.header().variables.at(1).name == "b");
  CHECK(r.time(1) == 2.5);
  CHECK(r.read_timestep(0).values == v0);
  const std::array<Extent, 3> box{Extent{1, 3}, Extent{1, 3}, Extent{2, 4}};
  const auto b = r.read_block(1, box);
  for (std::uint32_t z = 2; z < 4; ++z) {
    for (std::uint32_t y = 1; y < 3; ++y) {
      for (std::uint32_t x = 1; x < 3; ++x) {
        CHECK(b.values[0][b.local_index(x, y, z)] == v1[0][x + d[0] * (y + d[1] * z)]);
      }
    }
  }
  CHECK(decode_error([&] { (void)r.read_block(0, {Extent{0, 6}, Extent{0, 1}, Extent{0, 1}}); }) ==
        ErrorCode::OutOfBounds);
  CHECK(decode_error([&] { (void)r.time(2); }) == ErrorCode::UnknownTimestep);
}

TEST_CASE("file writers report missing directories") {
  const auto store = random_pdf_store(5, 1);
  CHECK(decode_error([&] { write_pdf_store("/nonexistent_dir/x.rpdf", store); }) == ErrorCode::IoError);
  CHECK(decode_error([] { (void)read_pdf_store("/nonexistent_dir/x.rpdf"); }) == ErrorCode::IoError);
}
