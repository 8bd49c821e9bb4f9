#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shield/cluster.hpp"
#include "shield/disprop.hpp"
#include "shield/error.hpp"
#include "shield/ingest.hpp"
#include "shield/report.hpp"

namespace shield {

inline constexpr std::string_view kVersion = SHIELD_VERSION_STRING;

enum class LabelerMode { Offline, Llm };

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path embeddings;
  std::vector<std::string> arms;  // empty: every arm, in file order
  std::string pt_column = "pt";
  double tau = 0.5;
  double gamma = 0.95;
  std::size_t draws = 20000;
  std::uint64_t seed = 42;
  LabelerMode labeler = LabelerMode::Offline;
  std::string llm_endpoint;
  std::string llm_model;
  std::size_t llm_max_in_flight = 4;
  std::filesystem::path out;
  std::optional<std::filesystem::path> viewer_assets;  // default: built-in stub viewer
  bool skip_missing = false;
  bool no_viewer = false;
  bool two_sided = false;
  bool label_hierarchy = false;
  SummaryStatistic summary = SummaryStatistic::Median;
  std::size_t min_cluster_size = 2;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws ConfigError unless gamma in (0,1), tau in [0,1), draws >= 1000,
/// min_cluster_size >= 1 and the LLM settings are complete for llm mode.
void validate(const RunConfig& config);

/// Stable text form of every setting that affects the outputs.
std::string canonical_config(const RunConfig& config);
/// 64-bit FNV-1a of canonical_config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

struct AnalysisResult {
  ReportBundle bundle;
  std::string html;
  IncidenceTable table;  // after zero-row filtering
  std::optional<SignalStats> stats;
  UtilityGraph graph;
  ClusterTree tree;
  std::vector<std::string> warnings;
};

/// Runs ingest, embedding lookup, disproportionality (k >= 2), utility,
/// clustering, labeling and report assembly. Errors carry the offending
/// file in their message.
AnalysisResult run_analysis(const RunConfig& config);

/// report files plus run_meta.json into config.out.
void write_outputs(const RunConfig& config, const AnalysisResult& result);

/// 0 success, 1 usage or configuration, 2 data error.
int exit_code_for(ErrorCode code);

}  // namespace shield
