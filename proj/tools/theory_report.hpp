#pragma once

#include <iosfwd>

#include <json.hpp>

#include "cli.hpp"

namespace svtv::cli {

/// Runs the verification checks at desk scale and collects their reports.
nlohmann::json theory_report(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace svtv::cli
