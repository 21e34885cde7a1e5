#include "regsum/server.hpp"

#include <charconv>
#include <httplib.h>

#include "regsum/json.hpp"
#include "regsum/particles.hpp"

namespace regsum {

using nlohmann::json;
using Params = std::multimap<std::string, std::string>;

namespace {

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

HttpResponse json_response(const json& j) { return {200, "application/json", j.dump(), {}}; }

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, "application/json", json{{"error", code}, {"message", message}}.dump(), {}};
}

std::optional<std::string> param(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

template <typename T>
T to_integer(const std::string& s, const std::string& key) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw BadRequest("'" + key + "' must be a non-negative integer");
  return v;
}

template <typename T>
T int_param(const Params& p, const std::string& key, std::optional<T> fallback = std::nullopt) {
  if (auto v = param(p, key)) return to_integer<T>(*v, key);
  if (fallback) return *fallback;
  throw BadRequest("missing query parameter '" + key + "'");
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw BadRequest(std::string("request body is not valid JSON: ") + e.what());
  }
}

template <typename T>
T body_int(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned()) throw BadRequest(std::string("'") + key + "' must be a non-negative integer");
  return j.at(key).get<T>();
}

std::vector<RegionId> ids_from_list(const std::string& s) {
  std::vector<RegionId> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    const std::string item = s.substr(start, comma - start);
    if (!item.empty()) out.push_back(RegionId{to_integer<std::uint32_t>(item, "regions")});
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RegionId> body_regions(const json& j) {
  if (!j.contains("regions")) throw BadRequest("missing 'regions'");
  try {
    return region_ids_from_json(j.at("regions"));
  } catch (const Error& e) {
    throw BadRequest(e.what());
  }
}

void check_regions(const Dataset& ds, std::span<const RegionId> ids) {
  for (RegionId r : ids) {
    if (!ds.grid().valid(r)) throw Error(ErrorCode::UnknownRegion, "region " + std::to_string(r.value));
  }
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidPredicate:
      return 422;
    case ErrorCode::UnknownVariable:
    case ErrorCode::UnknownRegion:
    case ErrorCode::UnknownTimestep:
    case ErrorCode::InvalidConfig:
    case ErrorCode::IndexOutOfRange:
      return 404;
    case ErrorCode::IoError:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::TruncatedFile:
    case ErrorCode::MalformedFile:
      return 500;
    default:
      return 400;
  }
}

Service::Service(std::shared_ptr<const Dataset> dataset, std::shared_ptr<const ParticleStoreReader> particles)
    : dataset_(std::move(dataset)), particles_(std::move(particles)) {
  if (particles_ && particles_->header().region_counts != dataset_->grid().region_counts()) {
    throw Error(ErrorCode::Incompatible, "particle store and PDF store use different region grids");
  }
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const Params& params,
                             const std::string& body) const {
  try {
    return route(method, path, params, body);
  } catch (const BadRequest& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const NotFound& e) {
    return error_response(404, "NotFound", e.what());
  } catch (const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

HttpResponse Service::route(const std::string& method, const std::string& path, const Params& params,
                            const std::string& body) const {
  const Dataset& ds = *dataset_;
  if (method == "GET" && path == "/meta") {
    json j = to_json(ds.meta(), ds.store().timesteps);
    j["particles"] = particles_ ? json(particles_->timestep_count()) : json(nullptr);
    return json_response(j);
  }
  if (method == "GET" && path == "/timeline") {
    const auto var = param(params, "var");
    if (!var) throw BadRequest("missing query parameter 'var'");
    const auto entries = ds.timeline(*var);
    return json_response(to_json(std::span<const TimelineEntry>(entries)));
  }
  if (method == "GET" && path == "/slice") {
    const auto t = int_param<std::size_t>(params, "t", 0);
    const auto config = int_param<std::size_t>(params, "config", 0);
    const auto axis_text = param(params, "axis").value_or("Z");
    const auto axis = parse_axis(axis_text);
    if (!axis) throw BadRequest("axis must be X, Y or Z");
    const auto index = int_param<std::uint32_t>(params, "index", 0);
    const auto lod = int_param<std::uint32_t>(params, "lod", 1);
    return json_response(to_json(ds.slice(t, config, *axis, index, lod)));
  }
  if (method == "GET" && path == "/pdf") {
    const auto t = int_param<std::size_t>(params, "t", 0);
    const auto config = int_param<std::size_t>(params, "config", 0);
    const auto region = int_param<std::uint32_t>(params, "region");
    json j = to_json(ds.histogram(t, config, RegionId{region}));
    j["timestep"] = t;
    j["config"] = config;
    j["region"] = region;
    return json_response(j);
  }
  if (method == "GET" && path == "/export") {
    Selection sel;
    sel.timestep = int_param<std::size_t>(params, "t", 0);
    sel.config = int_param<std::size_t>(params, "config", 0);
    const auto regions = param(params, "regions");
    if (!regions) throw BadRequest("missing query parameter 'regions'");
    sel.regions = ids_from_list(*regions);
    check_regions(ds, sel.regions);
    const auto format = param(params, "format").value_or("csv");
    if (format != "csv" && format != "json") throw BadRequest("format must be csv or json");
    const auto merged = ds.merge_selection(sel);
    const bool csv = format == "csv";
    HttpResponse r;
    r.content_type = csv ? "text/csv" : "application/json";
    r.body = export_merged(merged.pdf, csv ? ExportFormat::Csv : ExportFormat::Json);
    r.filename = "merged_t" + std::to_string(sel.timestep) + "_c" + std::to_string(sel.config) + "." + format;
    return r;
  }
  if (method == "POST" && path == "/select") {
    const json j = parse_body(body);
    std::size_t t = int_param<std::size_t>(params, "t", 0);
    std::size_t config = int_param<std::size_t>(params, "config", 0);
    const json* ast = &j;
    if (j.is_object() && j.contains("predicate")) {
      t = body_int<std::size_t>(j, "t", t);
      config = body_int<std::size_t>(j, "config", config);
      ast = &j.at("predicate");
    }
    const Predicate p = predicate_from_json(*ast);
    const Selection sel = ds.evaluate(t, config, p);
    return json_response(region_ids_to_json(sel.regions));
  }
  if (method == "POST" && path == "/merge") {
    const json j = parse_body(body);
    if (!j.is_object()) throw BadRequest("expected a JSON object");
    Selection sel;
    sel.timestep = body_int<std::size_t>(j, "t", 0);
    sel.config = body_int<std::size_t>(j, "config", 0);
    sel.regions = body_regions(j);
    check_regions(ds, sel.regions);
    return json_response(to_json(ds.merge_selection(sel)));
  }
  if (method == "POST" && path == "/extract") {
    if (!particles_) throw NotFound("no particle store is loaded");
    const json j = parse_body(body);
    if (!j.is_object()) throw BadRequest("expected a JSON object");
    const auto t = body_int<std::size_t>(j, "t", 0);
    const auto regions = body_regions(j);
    std::vector<RefineRange> refine;
    const auto& vars = particles_->header().variables;
    if (j.contains("refine")) {
      if (!j.at("refine").is_array()) throw BadRequest("'refine' must be an array");
      for (const auto& r : j.at("refine")) {
        if (!r.is_object() || !r.contains("var") || !r.at("var").is_string() || !r.contains("lo") ||
            !r.at("lo").is_number() || !r.contains("hi") || !r.at("hi").is_number()) {
          throw BadRequest("refine entries need var, lo and hi");
        }
        const auto name = r.at("var").get<std::string>();
        const auto id = find_variable(vars, name);
        if (!id) throw Error(ErrorCode::UnknownVariable, "unknown particle variable '" + name + "'");
        refine.push_back({*id, r.at("lo").get<double>(), r.at("hi").get<double>()});
      }
    }
    const auto records = extract(*particles_, t, regions, refine);
    std::vector<std::string> names;
    for (const auto& v : vars) names.push_back(v.name);
    return {200, "text/csv", records_to_csv(records, names), {}};
  }
  throw NotFound("no route for " + method + " " + path);
}

struct HttpServer::Impl {
  std::shared_ptr<const Service> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const Service> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto dispatch = [svc = impl_->service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = svc->handle(req.method, req.path, req.params, req.body);
    res.status = r.status;
    if (!r.filename.empty()) {
      res.set_header("Content-Disposition", "attachment; filename=\"" + r.filename + "\"");
    }
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/.*)", dispatch);
  impl_->server.Post(R"(/.*)", dispatch);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace regsum
