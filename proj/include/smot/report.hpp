#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "smot/metrics.hpp"

namespace smot {

/// Flat lower_snake_case metric keys for the requested suites, in report order.
std::vector<std::string> metric_keys(const MetricSelection& selection);

nlohmann::json to_json(const MetricValues& values, const MetricSelection& selection);

/// {"pooled": {...}, "per_sequence": {name: {...}}, "config": {...}}
nlohmann::json to_json(const MetricReport& report);

/// One row per sequence plus a trailing `__pooled__` row. Missing values are
/// left empty.
void write_csv(std::ostream& out, const MetricReport& report);

}  // namespace smot
