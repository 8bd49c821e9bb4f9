#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shield/cluster.hpp"
#include "shield/disprop.hpp"
#include "shield/ingest.hpp"
#include "shield/label.hpp"
#include "shield/utility.hpp"

namespace shield {

/// 2^ic
double fold_change(double ic);

/// printf-style fixed notation, e.g. format_fixed(0.03648, 4) == "0.0365".
std::string format_fixed(double value, int decimals);

struct ReportMeta {
  std::size_t k = 0;
  std::vector<std::string> arm_names;
  double gamma = 0.95;
  double tau = 0.5;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  std::string version;
  std::string summary = "median";
  std::vector<std::string> dropped_terms;  // PTs without embeddings (--skip-missing)
};

struct SummaryRow {
  std::string pt;
  std::string cluster = "None";
  std::optional<std::size_t> cluster_id;
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> n_subjects;
  std::vector<std::string> incidence;  // "c/N" per arm

  // k >= 2
  std::optional<double> adjusted_ic;
  std::optional<double> ic_lower;
  std::optional<double> ic_upper;
  std::optional<double> raw_ic;
  std::optional<double> p_value;
  std::optional<int> sign;  // k == 2
  std::vector<double> rr_median;

  // k == 1
  std::optional<double> incidence_proportion;

  // Table-style strings: signals 2 decimals, p-values 4 decimals.
  std::string fold_change_text;
  std::string ci_text;
  std::string raw_ratio_text;
  std::string p_value_text;
};

/// One row per PT in table order. Every clustered PT must appear in exactly
/// one label and `stats` (k >= 2) must cover the table; otherwise
/// InternalError.
std::vector<SummaryRow> build_summary(const IncidenceTable& table, const SignalStats* stats,
                                      std::span<const ClusterLabel> labels);

struct GraphNode {
  std::size_t id = 0;
  std::string pt;
  std::optional<std::size_t> cluster;
  std::string label = "None";
  double node_weight = 0.0;
  std::optional<double> ic_lower;
  std::optional<double> fold_change;
  std::vector<std::int64_t> c;
  std::vector<std::int64_t> n;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  double weight = 0.0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct GraphExport {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // weight > 0 only, source < target
  ReportMeta meta;
};

GraphExport build_graph_export(const UtilityGraph& u, std::span<const SummaryRow> rows,
                               const ReportMeta& meta);

/// Canonical JSON: sorted keys, shortest round-trip numbers, LF newlines.
std::string export_graph_json(const GraphExport& graph);
GraphExport parse_graph_json(const std::string& text);

struct DendrogramInput {
  std::vector<std::string> leaf_names;                 // per tree leaf
  std::vector<Merge> merges;
  std::vector<std::optional<std::size_t>> leaf_cluster;
  std::vector<std::string> cluster_labels;             // by cluster id
  std::vector<double> bar_value;                       // per leaf, signed
  std::vector<std::optional<double>> bar_lower;        // per leaf
  std::string bar_caption;
};

/// Horizontal dendrogram: branches colored by flat cluster, one labelled
/// leaf per row, and a signed bar per leaf with its lower bound marked.
std::string render_dendrogram_svg(const DendrogramInput& input);

struct ReportBundle {
  ReportMeta meta;
  std::vector<SummaryRow> rows;
  std::vector<ClusterLabel> clusters;
  std::vector<ClusterLabel> hierarchy_labels;  // internal dendrogram nodes, optional
  GraphExport graph;
  std::string dendrogram_svg;
};

std::string summary_csv(const ReportBundle& bundle);
std::string summary_json(const ReportBundle& bundle);

/// Self-contained page: summary table, dendrogram and, unless `no_viewer`,
/// the graph JSON plus the viewer script inlined. Throws ConfigError when
/// the viewer is wanted but `viewer_assets` is empty.
std::string render_html_report(const ReportBundle& bundle, std::string_view viewer_assets,
                               bool no_viewer);

/// Minimal built-in viewer script used when no compiled viewer is supplied.
std::string_view stub_viewer_script();

/// Writes summary.csv, summary.json, graph.json, dendrogram.svg and
/// report.html into `dir` (created if needed).
void write_report_files(const ReportBundle& bundle, const std::string& html,
                        const std::filesystem::path& dir);

}  // namespace shield
