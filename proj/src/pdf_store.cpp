#include <algorithm>
#include <cstring>
#include <fstream>

#include "format_common.hpp"

namespace regsum {

using detail::decode_variables;
using detail::encode_variables;

namespace {

constexpr char kPdfMagic[4] = {'R', 'P', 'D', 'F'};

}  // namespace

void detail::encode_variables(ByteWriter& w, std::span<const VariableInfo> vars) {
  if (vars.size() > 0xFFFF) throw Error(ErrorCode::InvalidConfig, "too many variables");
  w.u16(static_cast<std::uint16_t>(vars.size()));
  for (const auto& v : vars) {
    w.str16(v.name);
    w.str16(v.unit);
  }
}

std::vector<VariableInfo> detail::decode_variables(ByteReader& r) {
  const std::uint16_t n = r.u16();
  std::vector<VariableInfo> vars;
  vars.reserve(n);
  for (std::uint16_t i = 0; i < n; ++i) {
    VariableInfo v;
    v.name = r.str16();
    v.unit = r.str16();
    vars.push_back(std::move(v));
  }
  return vars;
}

std::optional<VarId> find_variable(std::span<const VariableInfo> vars, std::string_view name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return static_cast<VarId>(i);
  }
  return std::nullopt;
}

namespace {

void encode_header(ByteWriter& w, const PdfStoreMetadata& meta) {
  detail::put_magic(w, kPdfMagic);
  for (auto d : meta.grid.dims()) w.u32(d);
  for (auto c : meta.grid.region_counts()) w.u32(c);
  for (std::size_t a = 0; a < 3; ++a) {
    for (const Extent& e : meta.grid.extents(a)) {
      w.u32(e.lo);
      w.u32(e.hi);
    }
  }
  encode_variables(w, meta.variables);
  if (meta.configs.size() > 0xFFFF) throw Error(ErrorCode::InvalidConfig, "too many configs");
  w.u16(static_cast<std::uint16_t>(meta.configs.size()));
  for (const auto& c : meta.configs) {
    c.validate();
    w.u8(static_cast<std::uint8_t>(c.ndims()));
    for (VarId v : c.var_ids) w.u16(v);
    w.u8(static_cast<std::uint8_t>(c.strategy.kind));
    w.u32(c.strategy.max_bins);
    w.u8(c.condition ? 1 : 0);
    if (c.condition) {
      w.u16(c.condition->var);
      w.f64(c.condition->lo);
      w.f64(c.condition->hi);
    }
  }
}

PdfStoreMetadata decode_header(ByteReader& r) {
  detail::expect_magic(r, kPdfMagic);
  Index3 dims{};
  Index3 counts{};
  for (auto& d : dims) d = r.u32();
  for (auto& c : counts) c = r.u32();
  std::array<std::vector<Extent>, 3> extents;
  for (std::size_t a = 0; a < 3; ++a) {
    r.require(std::size_t{counts[a]} * 8);
    for (std::uint32_t i = 0; i < counts[a]; ++i) {
      const std::uint32_t lo = r.u32();
      const std::uint32_t hi = r.u32();
      extents[a].push_back({lo, hi});
    }
  }
  PdfStoreMetadata meta;
  try {
    meta.grid = RegionGrid::from_extents(dims, std::move(extents));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  meta.variables = decode_variables(r);
  const std::uint16_t nconfigs = r.u16();
  for (std::uint16_t i = 0; i < nconfigs; ++i) {
    PdfConfig c;
    const std::uint8_t nd = r.u8();
    if (nd != 1 && nd != 2) throw Error(ErrorCode::MalformedFile, "config ndims must be 1 or 2");
    for (std::uint8_t d = 0; d < nd; ++d) c.var_ids.push_back(r.u16());
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(Strategy::Fixed)) {
      throw Error(ErrorCode::MalformedFile, "unknown strategy tag " + std::to_string(tag));
    }
    c.strategy.kind = static_cast<Strategy>(tag);
    c.strategy.max_bins = r.u32();
    const std::uint8_t has_cond = r.u8();
    if (has_cond > 1) throw Error(ErrorCode::MalformedFile, "bad condition flag");
    if (has_cond) {
      Condition cond;
      cond.var = r.u16();
      cond.lo = r.f64();
      cond.hi = r.f64();
      c.condition = cond;
    }
    try {
      c.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedFile, e.what());
    }
    auto known = [&](VarId v) { return v < meta.variables.size(); };
    if (!std::all_of(c.var_ids.begin(), c.var_ids.end(), known) ||
        (c.condition && !known(c.condition->var))) {
      throw Error(ErrorCode::MalformedFile, "config references an unknown variable");
    }
    meta.configs.push_back(std::move(c));
  }
  return meta;
}

void encode_histogram(ByteWriter& w, const RegionalHistogram& h) {
  for (const auto& e : h.edges) {
    w.f64(e.min);
    w.f64(e.max);
    w.u32(e.nbins);
  }
  for (auto c : h.counts) w.u64(c);
  w.u64(h.out_of_range);
  w.u64(h.invalid);
  w.u64(h.sample_count);
  for (const auto& s : h.stats) {
    w.u64(s.count);
    w.f64(s.min);
    w.f64(s.max);
    w.f64(s.sum);
    w.f64(s.sum_sq);
  }
}

RegionalHistogram decode_histogram(ByteReader& r, const PdfConfig& config) {
  RegionalHistogram h;
  h.var_ids = config.var_ids;
  std::uint64_t cells = 1;
  for (std::size_t d = 0; d < config.ndims(); ++d) {
    BinEdges e;
    e.min = r.f64();
    e.max = r.f64();
    e.nbins = r.u32();
    // Bound the allocation by what is left in the buffer.
    if (e.nbins == 0 || e.nbins > r.remaining() / 8 || cells > r.remaining() / 8 / e.nbins) {
      throw Error(ErrorCode::TruncatedFile, "histogram bin count exceeds the remaining bytes");
    }
    cells *= e.nbins;
    h.edges.push_back(e);
  }
  r.require(cells * 8);
  h.counts.resize(cells);
  for (auto& c : h.counts) c = r.u64();
  h.out_of_range = r.u64();
  h.invalid = r.u64();
  h.sample_count = r.u64();
  h.stats.resize(config.ndims());
  for (auto& s : h.stats) {
    s.count = r.u64();
    s.min = r.f64();
    s.max = r.f64();
    s.sum = r.f64();
    s.sum_sq = r.f64();
  }
  return h;
}

void check_histogram(const RegionalHistogram& h) {
  for (const auto& e : h.edges) {
    try {
      (void)BinEdges::make(e.min, e.max, e.nbins);
    } catch (const Error& err) {
      throw Error(ErrorCode::MalformedFile, err.what());
    }
  }
  std::uint64_t total = 0;
  for (auto c : h.counts) total += c;
  if (total != h.sample_count) {
    throw Error(ErrorCode::MalformedFile, "histogram counts do not sum to sample_count");
  }
}

void check_summary(const PdfStoreMetadata& meta, const TimestepSummary& s) {
  const std::uint32_t nregions = meta.grid.region_count();
  if (s.regions.size() != nregions) {
    throw Error(ErrorCode::Incompatible, "summary must hold every region of the grid");
  }
  for (std::uint32_t r = 0; r < nregions; ++r) {
    const auto& rs = s.regions[r];
    if (rs.region.value != r || rs.per_config.size() != meta.configs.size()) {
      throw Error(ErrorCode::Incompatible, "summary regions/configs do not match the store layout");
    }
    for (std::size_t c = 0; c < meta.configs.size(); ++c) {
      if (rs.per_config[c].var_ids != meta.configs[c].var_ids) {
        throw Error(ErrorCode::Incompatible, "histogram variables do not match config");
      }
    }
  }
}

void encode_timestep(ByteWriter& w, const PdfStoreMetadata& meta, const TimestepSummary& s) {
  check_summary(meta, s);
  const std::size_t start = w.size();
  w.f64(s.time);
  for (const auto& rs : s.regions) {
    for (const auto& h : rs.per_config) encode_histogram(w, h);
  }
  w.u32(crc32c(w.view(start)));
}

TimestepSummary decode_timestep(ByteReader& r, const PdfStoreMetadata& meta) {
  const std::size_t start = r.pos();
  TimestepSummary s;
  s.time = r.f64();
  const std::uint32_t nregions = meta.grid.region_count();
  s.regions.resize(nregions);
  for (std::uint32_t id = 0; id < nregions; ++id) {
    s.regions[id].region = RegionId{id};
    s.regions[id].per_config.reserve(meta.configs.size());
    for (const auto& c : meta.configs) s.regions[id].per_config.push_back(decode_histogram(r, c));
  }
  const std::uint32_t expected = crc32c(r.consumed_since(start));
  const std::uint32_t stored = r.u32();
  if (stored != expected) throw Error(ErrorCode::ChecksumMismatch, "timestep payload checksum mismatch");
  for (const auto& rs : s.regions) {
    for (const auto& h : rs.per_config) check_histogram(h);
  }
  return s;
}

constexpr std::size_t kTimestepCountOffsetFromEnd = 4;

}  // namespace

std::vector<std::byte> encode_pdf_store(const PdfStore& store) {
  ByteWriter w;
  encode_header(w, store.meta);
  w.u32(static_cast<std::uint32_t>(store.timesteps.size()));
  for (const auto& s : store.timesteps) encode_timestep(w, store.meta, s);
  return std::move(w).take();
}

PdfStore decode_pdf_store(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  PdfStore store;
  store.meta = decode_header(r);
  const std::uint32_t nsteps = r.u32();
  for (std::uint32_t t = 0; t < nsteps; ++t) store.timesteps.push_back(decode_timestep(r, store.meta));
  if (r.remaining() != 0) throw Error(ErrorCode::MalformedFile, "trailing bytes after the last timestep");
  return store;
}

void write_pdf_store(const std::string& path, const PdfStore& store) {
  PdfStoreWriter w(path, store.meta);
  for (const auto& s : store.timesteps) w.append(s);
  w.finish();
}

PdfStore read_pdf_store(const std::string& path) { return decode_pdf_store(read_file(path)); }

struct PdfStoreWriter::Impl {
  std::ofstream out;
  PdfStoreMetadata meta;
  std::uint64_t count_offset = 0;
  std::uint32_t count = 0;
  bool finished = false;
  std::string path;
};

PdfStoreWriter::PdfStoreWriter(const std::string& path, PdfStoreMetadata meta)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->meta = std::move(meta);
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw Error(ErrorCode::IoError, "cannot create " + path);
  ByteWriter w;
  encode_header(w, impl_->meta);
  w.u32(0);
  impl_->count_offset = w.size() - kTimestepCountOffsetFromEnd;
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
}

PdfStoreWriter::~PdfStoreWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void PdfStoreWriter::append(const TimestepSummary& summary) {
  if (impl_->finished) throw Error(ErrorCode::IoError, "writer already finished");
  ByteWriter w;
  encode_timestep(w, impl_->meta, summary);
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
  if (!impl_->out) throw Error(ErrorCode::IoError, "write failed: " + impl_->path);
  ++impl_->count;
}

void PdfStoreWriter::finish() {
  if (!impl_ || impl_->finished) return;
  impl_->finished = true;
  ByteWriter w;
  w.u32(impl_->count);
  impl_->out.seekp(static_cast<std::streamoff>(impl_->count_offset));
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), 4);
  impl_->out.close();
  if (!impl_->out) throw Error(ErrorCode::IoError, "finalizing failed: " + impl_->path);
}

}  // namespace regsum
