#include <gtest/gtest.h>

#include <regex>

#include "shield/error.hpp"
#include "shield/report.hpp"
#include "support.hpp"

namespace shield {
namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST(FoldChange, Examples) {
  EXPECT_EQ(fold_change(0.0), 1.0);
  EXPECT_NEAR(fold_change(2.0475), 4.1339, 1e-4);
  EXPECT_EQ(fold_change(-1.0), 0.5);
}

TEST(Format, FixedDecimals) {
  EXPECT_EQ(format_fixed(0.036485, 4), "0.0365");
  EXPECT_EQ(format_fixed(1.234, 2), "1.23");
  EXPECT_EQ(format_fixed(-0.00001, 2), "0.00");
  EXPECT_EQ(format_fixed(3.0, 0), "3");
}

TEST(Summary, VomitingRowAndUnclustered) {
  const auto t = testing::load_table("table1.csv");
  SignalOptions opt;
  opt.sampling.draws = 2000;
  const auto stats = compute_signal_stats(t, opt);
  const std::vector<ClusterLabel> labels{{0, "GI", LabelSource::Fallback, {"Vomiting", "Nausea"}}};
  const auto rows = build_summary(t, &stats, labels);
  ASSERT_EQ(rows.size(), t.num_terms());
  const auto find = [&](const std::string& pt) {
    for (const auto& r : rows) {
      if (r.pt == pt) return r;
    }
    throw std::runtime_error(pt);
  };
  const auto vomiting = find("Vomiting");
  EXPECT_EQ(vomiting.cluster, "GI");
  EXPECT_EQ(vomiting.cluster_id, std::optional<std::size_t>(0));
  EXPECT_EQ(vomiting.raw_ratio_text, "1.23");
  EXPECT_EQ(vomiting.p_value_text, "0.0000");
  EXPECT_EQ(vomiting.incidence, (std::vector<std::string>{"41/63", "12/62", "45/60", "9/63"}));
  const auto ketonuria = find("Ketonuria");
  EXPECT_EQ(ketonuria.cluster, "None");
  EXPECT_FALSE(ketonuria.cluster_id.has_value());
  EXPECT_EQ(ketonuria.raw_ratio_text, "4.13");
  EXPECT_EQ(ketonuria.p_value_text, "0.0365");
}

TEST(Summary, SingleArmRows) {
  const IncidenceTable t({"Fall", "Rash"}, {"active"}, {63}, {5, 6});
  const auto rows = build_summary(t, nullptr, {});
  EXPECT_NEAR(*rows[0].incidence_proportion, 5.0 / 63.0, 1e-15);
  EXPECT_FALSE(rows[0].p_value.has_value());
  EXPECT_FALSE(rows[0].adjusted_ic.has_value());
  EXPECT_EQ(rows[1].incidence, (std::vector<std::string>{"6/63"}));
}

TEST(Summary, InconsistentInputsAreInternalErrors) {
  const IncidenceTable t({"Fall"}, {"a", "b"}, {10, 10}, {1, 2});
  EXPECT_THROW(build_summary(t, nullptr, {}), Error);
  const IncidenceTable one({"Fall"}, {"a"}, {10}, {1});
  const std::vector<ClusterLabel> unknown{{0, "x", LabelSource::Fallback, {"Rash"}}};
  EXPECT_THROW(build_summary(one, nullptr, unknown), Error);
}

GraphExport two_node_export() {
  UtilityGraph u{{"a", "b", "c"}, {2, 3, 0}, Matrix(3, 3)};
  u.matrix(0, 0) = 4;
  u.matrix(1, 1) = 9;
  u.matrix(0, 1) = u.matrix(1, 0) = 3.6;
  const IncidenceTable t({"a", "b", "c"}, {"only"}, {10}, {1, 2, 3});
  const std::vector<ClusterLabel> labels{{0, "≈ a", LabelSource::Fallback, {"a", "b"}}};
  const auto rows = build_summary(t, nullptr, labels);
  ReportMeta meta;
  meta.k = 1;
  meta.arm_names = {"only"};
  meta.version = "test";
  meta.seed = 18446744073709551615ULL;
  return build_graph_export(u, rows, meta);
}

TEST(GraphExport, NodesAndEdges) {
  const auto g = two_node_export();
  ASSERT_EQ(g.nodes.size(), 3u);
  EXPECT_EQ(g.nodes[0].node_weight, 4.0);
  EXPECT_EQ(g.nodes[1].node_weight, 9.0);
  EXPECT_EQ(g.nodes[0].cluster, std::optional<std::size_t>(0));
  EXPECT_EQ(g.nodes[2].label, "None");
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].source, 0u);
  EXPECT_EQ(g.edges[0].target, 1u);
  EXPECT_EQ(g.edges[0].weight, 3.6);
}

TEST(GraphExport, JsonRoundTripIsExactAndCanonical) {
  const auto g = two_node_export();
  const std::string text = export_graph_json(g);
  const auto back = parse_graph_json(text);
  EXPECT_EQ(back.nodes, g.nodes);
  EXPECT_EQ(back.edges, g.edges);
  EXPECT_EQ(back.meta.seed, g.meta.seed);
  EXPECT_EQ(export_graph_json(back), text);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_THROW(parse_graph_json("{\"nodes\": 3}"), Error);
}

DendrogramInput three_leaf_input() {
  DendrogramInput in;
  in.leaf_names = {"Fall", "Contusion & bruise", "Nausea"};
  in.merges = {{0, 1, 0.5, 2}, {3, 2, 2.0, 3}};
  in.leaf_cluster = {0, 0, 1};
  in.cluster_labels = {"Trauma", "GI"};
  in.bar_value = {0.8, 0.4, -0.6};
  in.bar_lower = {0.2, 0.1, -1.0};
  in.bar_caption = "Signed adjusted IC (bits)";
  return in;
}

TEST(Dendrogram, StructureAndEscaping) {
  const auto svg = render_dendrogram_svg(three_leaf_input());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count_of(svg, "class=\"leaf\""), 3u);
  EXPECT_NE(svg.find("Contusion &amp; bruise"), std::string::npos);
  EXPECT_EQ(count_of(svg, "<g "), count_of(svg, "</g>"));
  EXPECT_EQ(count_of(svg, "<text"), count_of(svg, "</text>"));
}

TEST(Dendrogram, NegativeBarsExtendLeft) {
  const auto svg = render_dendrogram_svg(three_leaf_input());
  const std::regex axis(R"re(<line x1="([0-9.]+)" y1="40.00")re");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, axis));
  const double zero = std::stod(m[1]);
  const std::regex bar(R"re(<rect class="bar" x="([0-9.]+)" y="[0-9.]+" width="([0-9.]+)")re");
  std::vector<std::pair<double, double>> bars;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), bar); it != std::sregex_iterator(); ++it) {
    bars.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  ASSERT_EQ(bars.size(), 3u);
  // Leaf order in the drawing is 0, 1, 2; Nausea is negative.
  EXPECT_NEAR(bars[0].first, zero, 0.01);
  EXPECT_NEAR(bars[2].first + bars[2].second, zero, 0.01);
  EXPECT_LT(bars[2].first, zero);
}

TEST(Dendrogram, EmptyTreeIsPlaceholder) {
  const auto svg = render_dendrogram_svg({});
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count_of(svg, "class=\"leaf\""), 0u);
}

ReportBundle small_bundle() {
  ReportBundle b;
  const auto g = two_node_export();
  b.meta = g.meta;
  b.graph = g;
  const IncidenceTable t({"a", "b", "c"}, {"only"}, {10}, {1, 2, 3});
  b.clusters = {{0, "≈ a", LabelSource::Fallback, {"a", "b"}}};
  b.rows = build_summary(t, nullptr, b.clusters);
  b.dendrogram_svg = render_dendrogram_svg({});
  return b;
}

TEST(Html, InlinesGraphAndViewer) {
  auto b = small_bundle();
  b.graph.nodes[0].pt = "</script><b>";
  const auto html = render_html_report(b, stub_viewer_script(), false);
  EXPECT_EQ(count_of(html, "<script"), 2u);
  EXPECT_EQ(count_of(html, "</script>"), 2u);
  EXPECT_NE(html.find("id=\"shield-graph\""), std::string::npos);
  EXPECT_EQ(count_of(html, "<tr><td>"), 3u);
  EXPECT_EQ(html.find("src="), std::string::npos);
  EXPECT_EQ(html.find("href=\"http"), std::string::npos);
}

TEST(Html, NoViewerModeHasNoScripts) {
  const auto html = render_html_report(small_bundle(), "", true);
  EXPECT_EQ(html.find("<script"), std::string::npos);
  EXPECT_NE(html.find("<svg"), std::string::npos);
}

TEST(Html, MissingAssetsIsConfigError) {
  try {
    render_html_report(small_bundle(), "", false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(SummaryFiles, SingleArmCsvHasNoSignalColumns) {
  const auto csv = summary_csv(small_bundle());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "cluster,pt,incidence_proportion,only");
  EXPECT_NE(csv.find("≈ a,a,0.1000,1/10"), std::string::npos);
  const auto json = summary_json(small_bundle());
  EXPECT_EQ(json.find("p_value"), std::string::npos);
}

}  // namespace
}  // namespace shield
