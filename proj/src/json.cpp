#include "regsum/json.hpp"

#include <cstdio>

#include "regsum/error.hpp"

namespace regsum {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::InvalidPredicate, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorCode::InvalidPredicate, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::string text(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidPredicate, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<Predicate> operands(const json& j) {
  const json& args = field(j, "args");
  if (!args.is_array()) throw Error(ErrorCode::InvalidPredicate, "'args' must be an array");
  std::vector<Predicate> out;
  for (const auto& a : args) out.push_back(predicate_from_json(a));
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Predicate predicate_from_json(const json& j) {
  const std::string op = text(j, "op");
  Predicate p;
  if (op == "mass_in_range") {
    MassInRange m;
    m.var = text(j, "var");
    m.lo = number(j, "lo");
    m.hi = number(j, "hi");
    if (j.contains("min_mass")) m.min_mass = number(j, "min_mass");
    p.node = m;
  } else if (op == "max_bin_in") {
    p.node = MaxBinIn{text(j, "var"), number(j, "lo"), number(j, "hi")};
  } else if (op == "non_empty") {
    p.node = NonEmpty{};
  } else if (op == "and") {
    p.node = And{operands(j)};
  } else if (op == "or") {
    p.node = Or{operands(j)};
  } else if (op == "not") {
    p = make_not(predicate_from_json(field(j, "arg")));
  } else {
    throw Error(ErrorCode::InvalidPredicate, "unknown op '" + op + "'");
  }
  validate(p);
  return p;
}

Predicate parse_predicate(std::string_view s) {
  json j;
  try {
    j = json::parse(s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidPredicate, std::string("predicate is not valid JSON: ") + e.what());
  }
  return predicate_from_json(j);
}

json to_json(const Predicate& p) {
  return std::visit(
      Overloaded{
          [](const MassInRange& m) -> json {
            return {{"op", "mass_in_range"}, {"var", m.var}, {"lo", m.lo}, {"hi", m.hi}, {"min_mass", m.min_mass}};
          },
          [](const MaxBinIn& m) -> json { return {{"op", "max_bin_in"}, {"var", m.var}, {"lo", m.lo}, {"hi", m.hi}}; },
          [](const NonEmpty&) -> json { return {{"op", "non_empty"}}; },
          [](const And& a) -> json {
            json args = json::array();
            for (const auto& x : a.args) args.push_back(to_json(x));
            return {{"op", "and"}, {"args", args}};
          },
          [](const Or& o) -> json {
            json args = json::array();
            for (const auto& x : o.args) args.push_back(to_json(x));
            return {{"op", "or"}, {"args", args}};
          },
          [](const Not& n) -> json { return {{"op", "not"}, {"arg", to_json(*n.arg)}}; },
      },
      p.node);
}

json to_json(const BinEdges& e) { return {{"min", e.min}, {"max", e.max}, {"nbins", e.nbins}}; }

json to_json(const VariableStats& s) {
  return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"sum", s.sum}, {"sum_sq", s.sum_sq}};
}

namespace {

template <typename Hist>
json histogram_common(const Hist& h) {
  json edges = json::array();
  for (const auto& e : h.edges) edges.push_back(to_json(e));
  json stats = json::array();
  for (const auto& s : h.stats) stats.push_back(to_json(s));
  return {{"ndims", h.ndims()},     {"var_ids", h.var_ids},
          {"edges", edges},         {"counts", h.counts},
          {"out_of_range", h.out_of_range}, {"invalid", h.invalid},
          {"sample_count", h.sample_count}, {"stats", stats}};
}

}  // namespace

json to_json(const RegionalHistogram& h) { return histogram_common(h); }

json to_json(const MergedPdf& m) {
  json j = histogram_common(m);
  j["source_region_count"] = m.source_region_count;
  return j;
}

json to_json(const MergeResult& r) {
  json stats = json::array();
  for (const auto& s : r.stats) {
    stats.push_back({{"var", s.var},
                     {"count", s.count},
                     {"mean", s.mean},
                     {"variance", s.variance},
                     {"min", s.min},
                     {"max", s.max}});
  }
  return {{"pdf", to_json(r.pdf)}, {"stats", stats}};
}

std::string_view axis_name(Axis a) noexcept {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view s) noexcept {
  if (s == "X" || s == "x" || s == "0") return Axis::X;
  if (s == "Y" || s == "y" || s == "1") return Axis::Y;
  if (s == "Z" || s == "z" || s == "2") return Axis::Z;
  return std::nullopt;
}

json to_json(const SliceView& v) {
  json thumbs = json::array();
  for (const auto& t : v.thumbnails) {
    thumbs.push_back({{"region", t.region.value},
                      {"col", t.col},
                      {"row", t.row},
                      {"nbins", t.nbins},
                      {"bin_edges", t.bin_edges},
                      {"counts", t.counts},
                      {"sample_count", t.sample_count}});
  }
  return {{"axis", axis_name(v.axis)},
          {"index", v.index},
          {"lod", v.lod},
          {"horizontal", axis_name(v.horizontal)},
          {"vertical", axis_name(v.vertical)},
          {"dims", {v.width, v.height}},
          {"thumbnails", thumbs}};
}

json to_json(std::span<const TimelineEntry> entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json row = {{"timestep", e.timestep}, {"time", e.time}, {"count", e.count}};
    row["mean"] = e.mean ? json(*e.mean) : json(nullptr);
    out.push_back(row);
  }
  return out;
}

json to_json(const PdfStoreMetadata& meta, std::span<const TimestepSummary> timesteps) {
  json vars = json::array();
  for (const auto& v : meta.variables) vars.push_back({{"name", v.name}, {"unit", v.unit}});
  json configs = json::array();
  for (const auto& c : meta.configs) {
    static constexpr const char* kNames[] = {"sturges", "scott", "fd", "fixed"};
    json cfg = {{"ndims", c.ndims()},
                {"var_ids", c.var_ids},
                {"strategy", kNames[static_cast<int>(c.strategy.kind)]},
                {"max_bins", c.strategy.max_bins}};
    if (c.condition) {
      cfg["condition"] = {{"var_id", c.condition->var}, {"lo", c.condition->lo}, {"hi", c.condition->hi}};
    } else {
      cfg["condition"] = nullptr;
    }
    configs.push_back(cfg);
  }
  json times = json::array();
  for (const auto& t : timesteps) times.push_back(t.time);
  json extents = json::array();
  for (std::size_t a = 0; a < 3; ++a) {
    json axis = json::array();
    for (const auto& e : meta.grid.extents(a)) axis.push_back({e.lo, e.hi});
    extents.push_back(axis);
  }
  return {{"grid",
           {{"dims", meta.grid.dims()},
            {"region_counts", meta.grid.region_counts()},
            {"region_extents", extents}}},
          {"variables", vars},
          {"configs", configs},
          {"timesteps", times}};
}

json region_ids_to_json(std::span<const RegionId> ids) {
  json out = json::array();
  for (auto r : ids) out.push_back(r.value);
  return out;
}

MergedPdf merged_from_json_value(const json& j) {
  try {
    MergedPdf m;
    m.var_ids = j.at("var_ids").get<std::vector<VarId>>();
    for (const auto& e : j.at("edges")) {
      m.edges.push_back(BinEdges::make(e.at("min").get<double>(), e.at("max").get<double>(),
                                       e.at("nbins").get<std::uint32_t>()));
    }
    m.counts = j.at("counts").get<std::vector<double>>();
    m.out_of_range = j.at("out_of_range").get<std::uint64_t>();
    m.invalid = j.at("invalid").get<std::uint64_t>();
    m.sample_count = j.at("sample_count").get<std::uint64_t>();
    m.source_region_count = j.at("source_region_count").get<std::uint64_t>();
    for (const auto& s : j.at("stats")) {
      VariableStats v;
      v.count = s.at("count").get<std::uint64_t>();
      v.min = s.at("min").get<double>();
      v.max = s.at("max").get<double>();
      v.sum = s.at("sum").get<double>();
      v.sum_sq = s.at("sum_sq").get<double>();
      m.stats.push_back(v);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("merged PDF JSON: ") + e.what());
  }
}

MergedPdf merged_from_json(std::string_view text) {
  try {
    return merged_from_json_value(json::parse(text));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, std::string("merged PDF JSON: ") + e.what());
  }
}

std::vector<RegionId> region_ids_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("regions") ? j.at("regions") : j;
  if (!arr.is_array()) throw Error(ErrorCode::InvalidPredicate, "expected an array of region ids");
  std::vector<RegionId> out;
  for (const auto& v : arr) {
    if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidPredicate, "region ids must be non-negative integers");
    out.push_back(RegionId{v.get<std::uint32_t>()});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string export_csv(const MergedPdf& m) {
  const double total = m.total_mass();
  std::string out;
  auto prob = [&](double c) { return total > 0.0 ? c / total : 0.0; };
  if (m.ndims() == 1) {
    out += "bin_lo,bin_hi,count,probability\n";
    const auto& e = m.edges[0];
    for (std::uint32_t i = 0; i < e.nbins; ++i) {
      out += fmt_real(e.lower(i)) + "," + fmt_real(e.upper(i)) + "," + fmt_real(m.counts[i]) + "," +
             fmt_real(prob(m.counts[i])) + "\n";
    }
    return out;
  }
  out += "bin0_lo,bin0_hi,bin1_lo,bin1_hi,count,probability\n";
  const auto& e0 = m.edges[0];
  const auto& e1 = m.edges[1];
  for (std::uint32_t j = 0; j < e1.nbins; ++j) {
    for (std::uint32_t i = 0; i < e0.nbins; ++i) {
      const double c = m.counts[i + std::size_t{e0.nbins} * j];
      out += fmt_real(e0.lower(i)) + "," + fmt_real(e0.upper(i)) + "," + fmt_real(e1.lower(j)) + "," +
             fmt_real(e1.upper(j)) + "," + fmt_real(c) + "," + fmt_real(prob(c)) + "\n";
    }
  }
  return out;
}

std::string export_json(const MergedPdf& m) { return to_json(m).dump(); }

std::string export_merged(const MergedPdf& m, ExportFormat format) {
  return format == ExportFormat::Csv ? export_csv(m) : export_json(m);
}

}  // namespace regsum
