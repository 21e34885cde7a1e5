#include <fstream>

#include "format_common.hpp"

namespace regsum {

namespace {

constexpr char kParticleMagic[4] = {'R', 'P', 'R', 'T'};

/// Sequential reads from a positional source; every byte goes through
/// read_at so instrumented sources see the true I/O.
class SourceCursor {
 public:
  SourceCursor(const ByteSource& src, std::uint64_t pos) : src_(src), pos_(pos) {}

  std::vector<std::byte> take(std::uint64_t n) {
    auto b = detail::read_range(src_, pos_, n);
    pos_ += n;
    return b;
  }
  std::uint64_t pos() const noexcept { return pos_; }

 private:
  const ByteSource& src_;
  std::uint64_t pos_;
};

void encode_header(ByteWriter& w, const ParticleStoreHeader& h) {
  detail::put_magic(w, kParticleMagic);
  for (auto c : h.region_counts) w.u32(c);
  detail::encode_variables(w, h.variables);
}

ParticleStoreHeader decode_header(ByteReader& r) {
  detail::expect_magic(r, kParticleMagic);
  ParticleStoreHeader h;
  for (auto& c : h.region_counts) {
    c = r.u32();
    if (c == 0) throw Error(ErrorCode::MalformedFile, "region count must be positive");
  }
  if (std::uint64_t{h.region_counts[0]} * h.region_counts[1] * h.region_counts[2] > 0xFFFFFFFFull) {
    throw Error(ErrorCode::MalformedFile, "region count overflows");
  }
  h.variables = detail::decode_variables(r);
  return h;
}

void encode_record(ByteWriter& w, const ParticleRecord& p, std::size_t nvars) {
  if (p.values.size() != nvars) {
    throw Error(ErrorCode::Incompatible, "particle value arity does not match the variable table");
  }
  w.u64(p.id);
  for (double x : p.pos) w.f64(x);
  for (float v : p.values) w.f32(v);
}

ParticleRecord decode_record(ByteReader& r, std::size_t nvars) {
  ParticleRecord p;
  p.id = r.u64();
  for (auto& x : p.pos) x = r.f64();
  p.values.resize(nvars);
  for (auto& v : p.values) v = r.f32();
  return p;
}

void encode_timestep(ByteWriter& w, const ParticleStoreHeader& h, double time,
                     std::span<const ParticleRecord> records, const ParticleIndexTable& table) {
  if (table.region_count() != h.region_count()) {
    throw Error(ErrorCode::Incompatible, "index table size does not match the region count");
  }
  table.validate(records.size());
  const std::size_t start = w.size();
  w.f64(time);
  w.u64(records.size());
  for (std::size_t r = 0; r < table.region_count(); ++r) {
    w.u64(table.offsets[r]);
    w.u64(table.counts[r]);
  }
  for (const auto& p : records) encode_record(w, p, h.variables.size());
  w.u32(crc32c(w.view(start)));
}

ParticleIndexTable decode_table(ByteReader& r, std::uint32_t nregions) {
  r.require(std::size_t{nregions} * 16);
  ParticleIndexTable t;
  t.offsets.resize(nregions);
  t.counts.resize(nregions);
  for (std::uint32_t i = 0; i < nregions; ++i) {
    t.offsets[i] = r.u64();
    t.counts[i] = r.u64();
  }
  return t;
}

ParticleTimestep decode_timestep(ByteReader& r, const ParticleStoreHeader& h) {
  const std::size_t start = r.pos();
  ParticleTimestep step;
  step.time = r.f64();
  const std::uint64_t n = r.u64();
  step.table = decode_table(r, h.region_count());
  const std::uint64_t rs = particle_record_size(h.variables.size());
  if (n > r.remaining() / rs) throw Error(ErrorCode::TruncatedFile, "record array passes the end");
  step.records.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) step.records.push_back(decode_record(r, h.variables.size()));
  const std::uint32_t expected = crc32c(r.consumed_since(start));
  if (r.u32() != expected) throw Error(ErrorCode::ChecksumMismatch, "particle timestep checksum mismatch");
  step.table.validate(n);
  return step;
}

}  // namespace

ParticleRecord decode_particle_record(std::span<const std::byte> bytes, std::size_t nvars) {
  ByteReader r(bytes);
  return decode_record(r, nvars);
}

std::vector<std::byte> encode_particle_store(const ParticleStore& store) {
  ByteWriter w;
  encode_header(w, store.header);
  w.u32(static_cast<std::uint32_t>(store.timesteps.size()));
  for (const auto& s : store.timesteps) encode_timestep(w, store.header, s.time, s.records, s.table);
  return std::move(w).take();
}

ParticleStore decode_particle_store(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  ParticleStore store;
  store.header = decode_header(r);
  const std::uint32_t nsteps = r.u32();
  for (std::uint32_t t = 0; t < nsteps; ++t) store.timesteps.push_back(decode_timestep(r, store.header));
  if (r.remaining() != 0) throw Error(ErrorCode::MalformedFile, "trailing bytes after the last timestep");
  return store;
}

void write_particle_store(const std::string& path, const ParticleStore& store) {
  ParticleStoreWriter w(path, store.header);
  for (const auto& s : store.timesteps) w.append(s.time, s.records, s.table);
  w.finish();
}

ParticleStore read_particle_store(const std::string& path) {
  return decode_particle_store(read_file(path));
}

struct ParticleStoreWriter::Impl {
  std::ofstream out;
  ParticleStoreHeader header;
  std::uint64_t count_offset = 0;
  std::uint32_t count = 0;
  bool finished = false;
  std::string path;
};

ParticleStoreWriter::ParticleStoreWriter(const std::string& path, ParticleStoreHeader header)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->header = std::move(header);
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw Error(ErrorCode::IoError, "cannot create " + path);
  ByteWriter w;
  encode_header(w, impl_->header);
  impl_->count_offset = w.size();
  w.u32(0);
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
}

ParticleStoreWriter::~ParticleStoreWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void ParticleStoreWriter::append(double time, std::span<const ParticleRecord> records,
                                 const ParticleIndexTable& table) {
  if (impl_->finished) throw Error(ErrorCode::IoError, "writer already finished");
  ByteWriter w;
  encode_timestep(w, impl_->header, time, records, table);
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
  if (!impl_->out) throw Error(ErrorCode::IoError, "write failed: " + impl_->path);
  ++impl_->count;
}

void ParticleStoreWriter::finish() {
  if (!impl_ || impl_->finished) return;
  impl_->finished = true;
  ByteWriter w;
  w.u32(impl_->count);
  impl_->out.seekp(static_cast<std::streamoff>(impl_->count_offset));
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), 4);
  impl_->out.close();
  if (!impl_->out) throw Error(ErrorCode::IoError, "finalizing failed: " + impl_->path);
}

ParticleStoreReader::ParticleStoreReader(std::shared_ptr<const ByteSource> source)
    : source_(std::move(source)) {
  SourceCursor cur(*source_, 0);
  {
    // magic, version, region counts, variable count
    auto fixed = cur.take(4 + 4 + 12 + 2);
    std::vector<std::byte> head(fixed);
    ByteReader probe(head);
    detail::expect_magic(probe, kParticleMagic);
    for (int i = 0; i < 3; ++i) probe.u32();
    const std::uint16_t nvars = probe.u16();
    for (std::uint32_t v = 0; v < 2u * nvars; ++v) {
      auto len = cur.take(2);
      head.insert(head.end(), len.begin(), len.end());
      const std::uint16_t n = ByteReader(len).u16();
      auto text = cur.take(n);
      head.insert(head.end(), text.begin(), text.end());
    }
    ByteReader r(head);
    header_ = decode_header(r);
  }
  const std::uint32_t nsteps = ByteReader(cur.take(4)).u32();
  const std::uint32_t nregions = header_.region_count();
  const std::uint64_t rs = record_size();
  std::uint64_t pos = cur.pos();
  index_bytes_ = pos;
  for (std::uint32_t t = 0; t < nsteps; ++t) {
    Step s;
    s.start = pos;
    const auto fixed = detail::read_range(*source_, pos, 16 + std::uint64_t{nregions} * 16);
    ByteReader r(fixed);
    s.time = r.f64();
    s.nrecords = r.u64();
    s.table = decode_table(r, nregions);
    index_bytes_ += fixed.size();
    s.table.validate(s.nrecords);
    s.records_base = pos + fixed.size();
    const std::uint64_t avail = source_->size() - s.records_base;
    if (s.nrecords > avail / rs || s.nrecords * rs + 4 > avail) {
      throw Error(ErrorCode::TruncatedFile, "timestep " + std::to_string(t) + " passes the end");
    }
    pos = s.records_base + s.nrecords * rs + 4;
    steps_.push_back(std::move(s));
  }
}

ParticleStoreReader ParticleStoreReader::open(const std::string& path) {
  return ParticleStoreReader(std::make_shared<FileSource>(path));
}

const ParticleStoreReader::Step& ParticleStoreReader::step(std::size_t t) const {
  if (t >= steps_.size()) {
    throw Error(ErrorCode::UnknownTimestep, "timestep " + std::to_string(t) + " of " +
                                               std::to_string(steps_.size()));
  }
  return steps_[t];
}

double ParticleStoreReader::time(std::size_t t) const { return step(t).time; }
const ParticleIndexTable& ParticleStoreReader::table(std::size_t t) const { return step(t).table; }
std::uint64_t ParticleStoreReader::records_base(std::size_t t) const { return step(t).records_base; }

std::vector<ParticleRecord> ParticleStoreReader::read_region(std::size_t t, RegionId r) const {
  const Step& s = step(t);
  if (r.value >= region_count()) {
    throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
  }
  const std::uint64_t count = s.table.counts[r.value];
  std::vector<ParticleRecord> out;
  if (count == 0) return out;
  const std::uint64_t rs = record_size();
  const auto bytes = detail::read_range(*source_, s.records_base + s.table.offsets[r.value] * rs, count * rs);
  ByteReader reader(bytes);
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(decode_record(reader, header_.variables.size()));
  return out;
}

ParticleTimestep ParticleStoreReader::read_timestep(std::size_t t) const {
  const Step& s = step(t);
  const std::uint64_t end = s.records_base + s.nrecords * record_size() + 4;
  const auto bytes = detail::read_range(*source_, s.start, end - s.start);
  ByteReader r(bytes);
  return decode_timestep(r, header_);
}

std::vector<ParticleRecord> read_region_particles(const std::string& path, std::size_t timestep,
                                                  RegionId region) {
  return ParticleStoreReader::open(path).read_region(timestep, region);
}

}  // namespace regsum
