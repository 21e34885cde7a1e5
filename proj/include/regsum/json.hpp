#pragma once

// JSON encodings shared by the CLI and the HTTP service. Field names are
// listed in docs/api.md.

#include <json.hpp>
#include <string_view>

#include "regsum/query.hpp"

namespace regsum {

/// Throws InvalidPredicate for anything that is not a well-formed AST.
Predicate predicate_from_json(const nlohmann::json& j);
Predicate parse_predicate(std::string_view text);
nlohmann::json to_json(const Predicate& p);

nlohmann::json to_json(const BinEdges& e);
nlohmann::json to_json(const VariableStats& s);
nlohmann::json to_json(const RegionalHistogram& h);
nlohmann::json to_json(const MergedPdf& m);
nlohmann::json to_json(const MergeResult& r);
nlohmann::json to_json(const SliceView& v);
nlohmann::json to_json(std::span<const TimelineEntry> entries);
nlohmann::json to_json(const PdfStoreMetadata& meta, std::span<const TimestepSummary> timesteps);
nlohmann::json region_ids_to_json(std::span<const RegionId> ids);

MergedPdf merged_from_json_value(const nlohmann::json& j);
/// Accepts a JSON array of ids, or an object with a "regions" array.
std::vector<RegionId> region_ids_from_json(const nlohmann::json& j);

std::string_view axis_name(Axis a) noexcept;
std::optional<Axis> parse_axis(std::string_view s) noexcept;

}  // namespace regsum
