// shield analyze: adverse-event signal detection and clustering for one study.

#include <CLI11.hpp>

#include <iostream>

#include "shield/pipeline.hpp"

namespace {

// Top-level keys in a --config file belong to the analyze subcommand, so a
// flat `sim-min = 0.6` file works as well as one with an [analyze] table.
class AnalyzeConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty()) item.parents.emplace_back("analyze");
    }
    return items;
  }
};

int analyze(const shield::RunConfig& config) {
  try {
    const auto result = shield::run_analysis(config);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    shield::write_outputs(config, result);
    std::cerr << "wrote " << result.table.num_terms() << " PTs in " << result.tree.num_clusters
              << " clusters to " << config.out.string() << '\n';
    return 0;
  } catch (const shield::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return shield::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adverse-event safety signal detection with semantic clustering"};
  app.set_version_flag("--version", std::string(shield::kVersion));
  app.require_subcommand(1);

  shield::RunConfig config;
  std::string labeler = "offline";
  std::string summary = "median";
  std::string viewer_assets;

  auto* cmd = app.add_subcommand("analyze", "Run the full pipeline on one incidence table");
  app.set_config("--config", "", "key = value file; command-line flags override it");
  app.config_formatter(std::make_shared<AnalyzeConfig>());
  cmd->fallthrough();
  cmd->add_option("--input", config.input, "Incidence CSV (pt column plus one column per arm)")->required();
  cmd->add_option("--embeddings", config.embeddings, "PT embeddings (CSV or SHEM binary)")->required();
  cmd->add_option("--arms", config.arms, "Arm columns to use, in order (default: all)")->delimiter(',');
  cmd->add_option("--pt-column", config.pt_column, "Name of the PT column")->capture_default_str();
  cmd->add_option("--sim-min", config.tau, "Cosine similarity threshold tau")->capture_default_str();
  cmd->add_option("--gamma", config.gamma, "Credible interval level")->capture_default_str();
  cmd->add_option("--draws", config.draws, "Posterior draws per PT")->capture_default_str();
  cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--labeler", labeler, "Cluster labeler")
      ->check(CLI::IsMember({"offline", "llm"}))
      ->capture_default_str();
  cmd->add_option("--llm-endpoint", config.llm_endpoint, "Chat-completions URL (llm labeler)");
  cmd->add_option("--llm-model", config.llm_model, "Model name (llm labeler)");
  cmd->add_option("--llm-max-in-flight", config.llm_max_in_flight, "Concurrent LLM requests")
      ->capture_default_str();
  cmd->add_option("--out", config.out, "Output directory")->required();
  cmd->add_option("--viewer-assets", viewer_assets, "Compiled viewer script to inline (default: built-in viewer)");
  cmd->add_flag("--skip-missing", config.skip_missing, "Drop PTs without embeddings instead of failing");
  cmd->add_flag("--no-viewer", config.no_viewer, "Report without the interactive graph");
  cmd->add_flag("--two-sided", config.two_sided, "Two-arm runs: unsigned IC, elevation in either arm");
  cmd->add_flag("--label-hierarchy", config.label_hierarchy, "Also label internal dendrogram nodes");
  cmd->add_option("--summary", summary, "Posterior summary reported as the adjusted signal")
      ->check(CLI::IsMember({"median", "mean"}))
      ->capture_default_str();
  cmd->add_option("--min-cluster-size", config.min_cluster_size, "Smallest reported cluster")
      ->capture_default_str();
  cmd->add_option("--threads", config.threads, "Sampling threads (0: all cores)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  config.labeler = labeler == "llm" ? shield::LabelerMode::Llm : shield::LabelerMode::Offline;
  config.summary = summary == "mean" ? shield::SummaryStatistic::Mean : shield::SummaryStatistic::Median;
  if (!viewer_assets.empty()) config.viewer_assets = viewer_assets;
  return analyze(config);
}
