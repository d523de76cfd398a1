#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridga/harness/experiment.hpp"

namespace gridga::harness {

using Json = nlohmann::ordered_json;

Json to_json(const MetricsReport& m);
Json to_json(const ConfusionCounts& c);
Json to_json(const ResultRow& row);
Json to_json(const GaStudy& study);
Json environment_stamp();

ResultRow row_from_json(const Json& j);

/// Adds or replaces `command`'s section in <dir>/results.json.
void store_run(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
               Json payload);
Json load_results(const std::filesystem::path& dir);

/// Writes every table derivable from the results document; returns the
/// paths written.
std::vector<std::filesystem::path> render_tables(const Json& results, const std::filesystem::path& dir);

std::string rows_csv(const std::vector<ResultRow>& rows);
std::string rows_markdown(const std::vector<ResultRow>& rows, const std::string& title);

}  // namespace gridga::harness
