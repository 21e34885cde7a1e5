#include <fstream>

#include "format_common.hpp"

namespace regsum {

namespace {

constexpr char kRawMagic[4] = {'R', 'F', 'L', 'D'};

}  // namespace

struct RawFieldWriter::Impl {
  std::ofstream out;
  std::uint64_t count_offset = 0;
  std::uint32_t count = 0;
  std::uint64_t cells = 0;
  std::size_t nvars = 0;
  bool finished = false;
  std::string path;
};

RawFieldWriter::RawFieldWriter(const std::string& path, const RectilinearAxes& axes,
                               std::vector<VariableInfo> variables)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw Error(ErrorCode::IoError, "cannot create " + path);
  ByteWriter w;
  detail::put_magic(w, kRawMagic);
  const Index3 dims = axes.dims();
  for (auto d : dims) w.u32(d);
  for (std::size_t a = 0; a < 3; ++a) {
    for (double c : axes.coords(a)) w.f64(c);
  }
  detail::encode_variables(w, variables);
  impl_->count_offset = w.size();
  w.u32(0);
  impl_->cells = std::uint64_t{dims[0]} * dims[1] * dims[2];
  impl_->nvars = variables.size();
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
}

RawFieldWriter::~RawFieldWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void RawFieldWriter::append(double time, std::span<const std::vector<double>> values) {
  if (impl_->finished) throw Error(ErrorCode::IoError, "writer already finished");
  if (values.size() != impl_->nvars) {
    throw Error(ErrorCode::Incompatible, "expected " + std::to_string(impl_->nvars) + " variables");
  }
  ByteWriter w;
  w.f64(time);
  for (const auto& v : values) {
    if (v.size() != impl_->cells) throw Error(ErrorCode::Incompatible, "variable array has the wrong size");
    for (double x : v) w.f64(x);
  }
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), static_cast<std::streamsize>(w.size()));
  if (!impl_->out) throw Error(ErrorCode::IoError, "write failed: " + impl_->path);
  ++impl_->count;
}

void RawFieldWriter::finish() {
  if (!impl_ || impl_->finished) return;
  impl_->finished = true;
  ByteWriter w;
  w.u32(impl_->count);
  impl_->out.seekp(static_cast<std::streamoff>(impl_->count_offset));
  impl_->out.write(reinterpret_cast<const char*>(w.view().data()), 4);
  impl_->out.close();
  if (!impl_->out) throw Error(ErrorCode::IoError, "finalizing failed: " + impl_->path);
}

RawFieldReader::RawFieldReader(std::shared_ptr<const ByteSource> source) : source_(std::move(source)) {
  std::uint64_t pos = 0;
  auto take = [&](std::uint64_t n) {
    auto b = detail::read_range(*source_, pos, n);
    pos += n;
    return b;
  };
  {
    auto head = take(8);
    ByteReader r(head);
    detail::expect_magic(r, kRawMagic);
  }
  Index3 dims{};
  {
    auto b = take(12);
    ByteReader r(b);
    for (auto& d : dims) d = r.u32();
  }
  std::array<std::vector<double>, 3> coords;
  for (std::size_t a = 0; a < 3; ++a) {
    auto b = take(std::uint64_t{dims[a]} * 8);
    ByteReader r(b);
    coords[a].resize(dims[a]);
    for (auto& c : coords[a]) c = r.f64();
  }
  try {
    header_.axes = RectilinearAxes(std::move(coords[0]), std::move(coords[1]), std::move(coords[2]));
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  const std::uint16_t nvars = ByteReader(take(2)).u16();
  for (std::uint16_t v = 0; v < nvars; ++v) {
    VariableInfo info;
    info.name = [&] {
      const std::uint16_t n = ByteReader(take(2)).u16();
      auto s = take(n);
      return std::string(reinterpret_cast<const char*>(s.data()), s.size());
    }();
    info.unit = [&] {
      const std::uint16_t n = ByteReader(take(2)).u16();
      auto s = take(n);
      return std::string(reinterpret_cast<const char*>(s.data()), s.size());
    }();
    header_.variables.push_back(std::move(info));
  }
  header_.timesteps = ByteReader(take(4)).u32();
  data_start_ = pos;
  const std::uint64_t step_bytes = 8 + header_.cells() * 8 * header_.variables.size();
  if (header_.timesteps > 0 && (source_->size() - data_start_) / step_bytes < header_.timesteps) {
    throw Error(ErrorCode::TruncatedFile, "raw field file is shorter than its timestep count");
  }
}

RawFieldReader RawFieldReader::open(const std::string& path) {
  return RawFieldReader(std::make_shared<FileSource>(path));
}

std::uint64_t RawFieldReader::step_offset(std::size_t t) const {
  if (t >= header_.timesteps) {
    throw Error(ErrorCode::UnknownTimestep, "timestep " + std::to_string(t) + " of " +
                                               std::to_string(header_.timesteps));
  }
  return data_start_ + t * (8 + header_.cells() * 8 * header_.variables.size());
}

double RawFieldReader::time(std::size_t t) const {
  return ByteReader(detail::read_range(*source_, step_offset(t), 8)).f64();
}

FieldBlock RawFieldReader::read_timestep(std::size_t t) const {
  const Index3 d = header_.dims();
  return read_block(t, {Extent{0, d[0]}, Extent{0, d[1]}, Extent{0, d[2]}});
}

FieldBlock RawFieldReader::read_block(std::size_t t, const std::array<Extent, 3>& extents) const {
  const Index3 d = header_.dims();
  for (std::size_t a = 0; a < 3; ++a) {
    if (extents[a].hi > d[a] || extents[a].lo >= extents[a].hi) {
      throw Error(ErrorCode::OutOfBounds, "block extent outside the grid");
    }
  }
  const std::uint64_t base = step_offset(t) + 8;
  const std::uint64_t var_bytes = header_.cells() * 8;
  FieldBlock b;
  b.extents = extents;
  b.values.resize(header_.variables.size());
  const std::uint32_t row = extents[0].size();
  std::vector<std::byte> buf(std::size_t{row} * 8);
  for (std::size_t v = 0; v < b.values.size(); ++v) {
    auto& out = b.values[v];
    out.reserve(b.size());
    for (std::uint32_t z = extents[2].lo; z < extents[2].hi; ++z) {
      for (std::uint32_t y = extents[1].lo; y < extents[1].hi; ++y) {
        const std::uint64_t cell = extents[0].lo + std::uint64_t{d[0]} * (y + std::uint64_t{d[1]} * z);
        source_->read_at(base + v * var_bytes + cell * 8, buf);
        ByteReader r(buf);
        for (std::uint32_t i = 0; i < row; ++i) out.push_back(r.f64());
      }
    }
  }
  return b;
}

}  // namespace regsum
