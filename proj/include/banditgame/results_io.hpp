#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "banditgame/experiments.hpp"

namespace banditgame {

enum class ResultFormat { csv, json, svg };

ResultFormat parse_result_format(const std::string& name);

inline constexpr const char* kRegretCsvHeader = "algorithm,T,epsilon,mean_regret,p10,p90,trials,seed";
inline constexpr const char* kPsneCsvHeader = "d_min,d_1,m,n,t,t_over_opt,success_rate,trials,seed";

/// {"kind", "config", "provenance", "rows", "fits", "thresholds"}.
nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

/// One header row, then one line per result row. Doubles use the shortest
/// representation that round-trips.
void write_csv(std::ostream& out, const ExperimentResult& result);
/// Self-contained SVG: log-log regret curves with p10-p90 bands and fitted
/// lines, or success rate against t / OPT on a log x-axis.
void write_svg(std::ostream& out, const ExperimentResult& result);

/// Throws std::runtime_error naming `path` on I/O failure.
void write_results(const ExperimentResult& result, const std::string& path, ResultFormat format);
ExperimentResult read_results_json(const std::string& path);

}  // namespace banditgame
