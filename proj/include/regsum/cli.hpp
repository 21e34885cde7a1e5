#pragma once

#include <iosfwd>
#include <span>
#include <string_view>

#include "regsum/store.hpp"
#include "regsum/summarizer.hpp"

namespace regsum {

/// Parses "<n>d:<var>[,<var>]:<strategy>[:max=N][:cond=<var>,<lo>,<hi>]" where
/// strategy is sturges, scott, fd or fixed=N. Throws InvalidConfig on syntax
/// errors and UnknownVariable for names missing from vars.
PdfConfig parse_config_spec(std::string_view spec, std::span<const VariableInfo> vars);

/// Entry point of the regsum tool. Returns 0 on success, 1 on usage errors
/// and 2 on data errors; diagnostics go to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regsum
