#include "regsum/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "regsum/error.hpp"
#include "regsum/json.hpp"
#include "regsum/particles.hpp"
#include "regsum/server.hpp"
#include "regsum/synth.hpp"

namespace regsum {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

Index3 parse_triple(const std::string& text, const char* flag) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError(std::string(flag) + " expects three comma-separated integers");
  Index3 out{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto v = parse_number<std::uint32_t>(parts[a]);
    if (!v) throw UsageError(std::string(flag) + " expects three comma-separated integers");
    out[a] = *v;
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "@file" reads the predicate from a file.
Predicate load_predicate(const std::string& arg) {
  return parse_predicate(arg.size() > 1 && arg[0] == '@' ? read_text(arg.substr(1)) : arg);
}

std::vector<RegionId> parse_region_list(const std::string& text) {
  std::vector<RegionId> out;
  std::string item;
  std::istringstream ss(text);
  while (ss >> std::ws && std::getline(ss, item, ',')) {
    std::istringstream words(item);
    std::string w;
    while (words >> w) {
      const auto v = parse_number<std::uint32_t>(w);
      if (!v) throw UsageError("region ids must be non-negative integers, got '" + w + "'");
      out.push_back(RegionId{*v});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// An existing file is a lasso export (JSON ids or {"regions": [...]}) or a
// plain list; anything else is an inline comma list.
std::vector<RegionId> load_regions(const std::string& arg) {
  if (!std::filesystem::is_regular_file(arg)) return parse_region_list(arg);
  const std::string text = read_text(arg);
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_discarded()) {
    try {
      return region_ids_from_json(j);
    } catch (const Error& e) {
      throw UsageError(arg + ": " + e.what());
    }
  }
  return parse_region_list(text);
}

RefineRange parse_refine(const std::string& text, std::span<const VariableInfo> vars) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError("--refine expects var,lo,hi");
  const auto id = find_variable(vars, parts[0]);
  if (!id) throw Error(ErrorCode::UnknownVariable, "unknown particle variable '" + parts[0] + "'");
  const auto lo = parse_number<double>(parts[1]);
  const auto hi = parse_number<double>(parts[2]);
  if (!lo || !hi || *lo > *hi) throw UsageError("--refine expects var,lo,hi with lo <= hi");
  return {*id, *lo, *hi};
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot create " + path);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed: " + path);
}

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_same_grid(const Dataset& ds, const ParticleStoreReader& particles) {
  if (particles.header().region_counts != ds.grid().region_counts()) {
    throw Error(ErrorCode::Incompatible, "particle store and PDF store use different region grids");
  }
}

}  // namespace

PdfConfig parse_config_spec(std::string_view spec, std::span<const VariableInfo> vars) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::InvalidConfig, "config '" + std::string(spec) + "': " + why);
  };
  const auto parts = split(spec, ':');
  if (parts.size() < 3) throw bad("expected <n>d:<vars>:<strategy>");
  PdfConfig cfg;
  std::size_t ndims = 0;
  if (parts[0] == "1d") {
    ndims = 1;
  } else if (parts[0] == "2d") {
    ndims = 2;
  } else {
    throw bad("dimensionality must be 1d or 2d");
  }
  for (const auto& name : split(parts[1], ',')) {
    const auto id = find_variable(vars, name);
    if (!id) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    cfg.var_ids.push_back(*id);
  }
  if (cfg.var_ids.size() != ndims) throw bad("variable count does not match " + parts[0]);

  const std::string& strat = parts[2];
  std::optional<std::uint32_t> fixed;
  if (strat == "sturges") {
    cfg.strategy = BinningStrategy::sturges();
  } else if (strat == "scott") {
    cfg.strategy = BinningStrategy::scott();
  } else if (strat == "fd") {
    cfg.strategy = BinningStrategy::freedman_diaconis();
  } else if (strat.rfind("fixed=", 0) == 0) {
    fixed = parse_number<std::uint32_t>(std::string_view(strat).substr(6));
    if (!fixed || *fixed == 0) throw bad("fixed=N needs a positive bin count");
    cfg.strategy = BinningStrategy::fixed(*fixed);
  } else {
    throw bad("unknown strategy '" + strat + "'");
  }

  for (std::size_t i = 3; i < parts.size(); ++i) {
    const std::string& opt = parts[i];
    if (opt.rfind("max=", 0) == 0) {
      const auto n = parse_number<std::uint32_t>(std::string_view(opt).substr(4));
      if (!n || *n == 0) throw bad("max=N needs a positive bin count");
      if (fixed) throw bad("max= does not apply to fixed");
      cfg.strategy.max_bins = *n;
    } else if (opt.rfind("cond=", 0) == 0) {
      const auto c = split(std::string_view(opt).substr(5), ',');
      if (c.size() != 3) throw bad("cond= expects var,lo,hi");
      const auto id = find_variable(vars, c[0]);
      if (!id) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + c[0] + "'");
      const auto lo = parse_number<double>(c[1]);
      const auto hi = parse_number<double>(c[2]);
      if (!lo || !hi) throw bad("cond= bounds must be numbers");
      cfg.condition = Condition{*id, *lo, *hi};
    } else {
      throw bad("unknown option '" + opt + "'");
    }
  }
  cfg.validate();
  return cfg;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regional PDF summaries of time-varying simulation fields", "regsum"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic fields (RFLD) and unsorted particles");
  std::string dims_text = "64,64,64";
  SynthSpec spec;
  std::string synth_fields, synth_particles;
  synth->add_option("--dims", dims_text, "Grid points per axis, x,y,z");
  synth->add_option("--steps", spec.timesteps, "Number of timesteps");
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--particles", spec.particles, "Number of tracer particles");
  synth->add_option("--fields-out", synth_fields, "Raw field output (RFLD)")->required();
  synth->add_option("--particles-out", synth_particles, "Unsorted particle output (RPRT)")->required();

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Compute regional PDFs from a raw field file");
  std::string sum_input, sum_output, regions_text, blocks_text = "1,1,1";
  std::vector<std::string> config_specs;
  summarize->add_option("--input", sum_input, "Raw field input (RFLD)")->required();
  summarize->add_option("--regions", regions_text, "Region counts, Rx,Ry,Rz")->required();
  summarize->add_option("--config", config_specs, "PDF config, e.g. 2d:heat_release,ch2o:fd")->required();
  summarize->add_option("--blocks", blocks_text, "Region-aligned blocks streamed per timestep");
  summarize->add_option("--output", sum_output, "PDF store output (RPDF)")->required();

  // index
  auto* index = app.add_subcommand("index", "Sort particles by region and write an indexed store");
  std::string idx_input, idx_fields, idx_pdf, idx_regions, idx_output;
  index->add_option("--input", idx_input, "Unsorted particles (RPRT)")->required();
  index->add_option("--fields", idx_fields, "Raw field file providing the grid coordinates")->required();
  auto* idx_grid_pdf = index->add_option("--pdf", idx_pdf, "Take the region grid from this PDF store");
  auto* idx_grid_regions = index->add_option("--regions", idx_regions, "Region counts, Rx,Ry,Rz");
  idx_grid_pdf->excludes(idx_grid_regions);
  index->add_option("--output", idx_output, "Indexed particle store (RPRT)")->required();

  // query / extract / merge share selection flags
  std::string pdf_path, predicate_text, particles_path, regions_arg, export_format = "json", output_path;
  std::size_t timestep = 0, config = 0;
  std::vector<std::string> refine_specs;

  auto* query = app.add_subcommand("query", "Print the region ids selected by a predicate");
  query->add_option("--pdf", pdf_path, "PDF store (RPDF)")->required();
  query->add_option("--predicate", predicate_text, "Predicate JSON, or @file")->required();
  query->add_option("--timestep", timestep, "Timestep index");
  query->add_option("--config", config, "Config index");

  auto* extract_cmd = app.add_subcommand("extract", "Write particles of the selected regions as CSV");
  extract_cmd->add_option("--pdf", pdf_path, "PDF store (RPDF)")->required();
  extract_cmd->add_option("--particles", particles_path, "Indexed particle store (RPRT)")->required();
  extract_cmd->add_option("--predicate", predicate_text, "Predicate JSON, or @file")->required();
  extract_cmd->add_option("--timestep", timestep, "Timestep index");
  extract_cmd->add_option("--config", config, "Config index");
  extract_cmd->add_option("--refine", refine_specs, "Particle value filter var,lo,hi");
  extract_cmd->add_option("--output", output_path, "Output file (default: standard output)");

  auto* merge = app.add_subcommand("merge", "Merge the PDFs of a region selection and export it");
  merge->add_option("--pdf", pdf_path, "PDF store (RPDF)")->required();
  merge->add_option("--regions", regions_arg, "Region ids (comma list) or a lasso selection file")->required();
  merge->add_option("--timestep", timestep, "Timestep index");
  merge->add_option("--config", config, "Config index");
  merge->add_option("--export", export_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  merge->add_option("--output", output_path, "Output file (default: standard output)");

  auto* stats = app.add_subcommand("stats", "Per-timestep means of binned variables");
  std::vector<std::string> stat_vars;
  stats->add_option("--pdf", pdf_path, "PDF store (RPDF)")->required();
  stats->add_option("--var", stat_vars, "Variable (default: every binned variable)");

  auto* serve = app.add_subcommand("serve", "Serve a PDF store over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--pdf", pdf_path, "PDF store (RPDF)")->required();
  serve->add_option("--particles", particles_path, "Indexed particle store (RPRT)");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      spec.dims = parse_triple(dims_text, "--dims");
      generate(spec, synth_fields, synth_particles);
    } else if (*summarize) {
      const RawFieldReader reader = RawFieldReader::open(sum_input);
      const RegionGrid grid = RegionGrid::build(reader.header().dims(), parse_triple(regions_text, "--regions"));
      PdfStoreMetadata meta{grid, reader.header().variables, {}};
      for (const auto& s : config_specs) meta.configs.push_back(parse_config_spec(s, meta.variables));
      const auto boxes = aligned_blocks(grid, parse_triple(blocks_text, "--blocks"));
      PdfStoreWriter writer(sum_output, meta);
      for (std::size_t t = 0; t < reader.header().timesteps; ++t) {
        const double time = reader.time(t);
        std::vector<TimestepSummary> parts;
        for (const auto& box : boxes) {
          parts.push_back(summarize_block(time, reader.read_block(t, box), grid, meta.configs));
        }
        writer.append(merge_partials(parts));
      }
      writer.finish();
    } else if (*index) {
      const RawFieldReader fields = RawFieldReader::open(idx_fields);
      RegionGrid grid;
      if (!idx_pdf.empty()) {
        grid = read_pdf_store(idx_pdf).meta.grid;
        if (grid.dims() != fields.header().dims()) {
          throw Error(ErrorCode::Incompatible, "PDF store and raw field file have different dims");
        }
      } else if (!idx_regions.empty()) {
        grid = RegionGrid::build(fields.header().dims(), parse_triple(idx_regions, "--regions"));
      } else {
        throw UsageError("index needs --pdf or --regions");
      }
      const ParticleStoreReader input = ParticleStoreReader::open(idx_input);
      ParticleStoreWriter writer(idx_output, ParticleStoreHeader{grid.region_counts(), input.header().variables});
      std::uint64_t outside = 0;
      for (std::size_t t = 0; t < input.timestep_count(); ++t) {
        const auto step = input.read_timestep(t);
        const auto sorted = sort_and_index(step.records, grid, fields.header().axes);
        outside += sorted.out_of_domain.size();
        writer.append(step.time, sorted.records, sorted.table);
      }
      writer.finish();
      if (outside > 0) err << "warning: " << outside << " particle samples outside the domain were dropped\n";
    } else if (*query) {
      const Dataset ds = Dataset::load(pdf_path);
      const auto sel = ds.evaluate(timestep, config, load_predicate(predicate_text));
      out << region_ids_to_json(sel.regions).dump() << "\n";
    } else if (*extract_cmd) {
      const Dataset ds = Dataset::load(pdf_path);
      const ParticleStoreReader particles = ParticleStoreReader::open(particles_path);
      check_same_grid(ds, particles);
      const auto sel = ds.evaluate(timestep, config, load_predicate(predicate_text));
      std::vector<RefineRange> refine;
      for (const auto& r : refine_specs) refine.push_back(parse_refine(r, particles.header().variables));
      const auto records = extract(particles, timestep, sel.regions, refine);
      std::vector<std::string> names;
      for (const auto& v : particles.header().variables) names.push_back(v.name);
      write_output(output_path, records_to_csv(records, names), out);
    } else if (*merge) {
      const Dataset ds = Dataset::load(pdf_path);
      Selection sel{timestep, config, load_regions(regions_arg)};
      for (RegionId r : sel.regions) {
        if (!ds.grid().valid(r)) throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
      }
      const auto merged = ds.merge_selection(sel);
      const auto format = export_format == "csv" ? ExportFormat::Csv : ExportFormat::Json;
      std::string text = export_merged(merged.pdf, format);
      if (format == ExportFormat::Json) text += "\n";
      write_output(output_path, text, out);
    } else if (*stats) {
      const Dataset ds = Dataset::load(pdf_path);
      if (stat_vars.empty()) {
        for (const auto& v : ds.meta().variables) {
          const bool binned = std::any_of(ds.meta().configs.begin(), ds.meta().configs.end(), [&](const PdfConfig& c) {
            return std::find(c.var_ids.begin(), c.var_ids.end(), *find_variable(ds.meta().variables, v.name)) !=
                   c.var_ids.end();
          });
          if (binned) stat_vars.push_back(v.name);
        }
      }
      out << "var,timestep,time,count,mean\n";
      for (const auto& v : stat_vars) {
        for (const auto& e : ds.timeline(v)) {
          out << v << "," << e.timestep << "," << fmt_real(e.time) << "," << e.count << ","
              << (e.mean ? fmt_real(*e.mean) : std::string()) << "\n";
        }
      }
    } else if (*serve) {
      auto ds = std::make_shared<const Dataset>(Dataset::load(pdf_path));
      std::shared_ptr<const ParticleStoreReader> particles;
      if (!particles_path.empty()) {
        particles = std::make_shared<const ParticleStoreReader>(ParticleStoreReader::open(particles_path));
      }
      HttpServer server(std::make_shared<const Service>(ds, particles));
      const int bound = server.bind(host, port);
      out << "listening on http://" << host << ":" << bound << std::endl;
      server.listen();
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    const ErrorCode c = e.code();
    const bool usage = c == ErrorCode::InvalidConfig || c == ErrorCode::InvalidPredicate ||
                       c == ErrorCode::InvalidSpec || c == ErrorCode::InvalidDecomposition;
    err << (usage ? "usage error: " : "error: ") << e.what() << "\n";
    return usage ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace regsum
