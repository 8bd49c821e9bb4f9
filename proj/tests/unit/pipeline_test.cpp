#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "shield/error.hpp"
#include "shield/pipeline.hpp"
#include "support.hpp"

namespace shield {
namespace {

namespace fs = std::filesystem;

RunConfig base_config(const std::string& input, const std::string& out) {
  RunConfig c;
  c.input = testing::data_path(input);
  c.embeddings = testing::data_path("table1_embeddings.shem");
  c.out = fs::path(::testing::TempDir()) / out;
  c.draws = 2000;
  c.threads = 1;
  return c;
}

ErrorCode run_error(const RunConfig& c) {
  try {
    run_analysis(c);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InternalError;
}

TEST(Config, Validation) {
  auto c = base_config("table1.csv", "v");
  EXPECT_NO_THROW(validate(c));
  auto bad = c;
  bad.gamma = 1.0;
  EXPECT_THROW(validate(bad), Error);
  bad = c;
  bad.tau = 1.0;
  EXPECT_THROW(validate(bad), Error);
  bad = c;
  bad.draws = 999;
  EXPECT_THROW(validate(bad), Error);
  bad = c;
  bad.labeler = LabelerMode::Llm;
  EXPECT_THROW(validate(bad), Error);
}

TEST(Config, HashTracksSettings) {
  auto a = base_config("table1.csv", "h");
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 43;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.threads = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
}

TEST(ExitCodes, UsageVersusData) {
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigError), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::InvalidCount), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::MissingEmbedding), 2);
}

TEST(Pipeline, FourArmRun) {
  const auto c = base_config("table1.csv", "k4");
  const auto r = run_analysis(c);
  EXPECT_EQ(r.bundle.rows.size(), 72u);
  EXPECT_EQ(r.bundle.meta.k, 4u);
  ASSERT_TRUE(r.stats.has_value());
  for (const auto& row : r.bundle.rows) {
    ASSERT_TRUE(row.p_value.has_value());
    EXPECT_FALSE(row.sign.has_value());
  }
  EXPECT_EQ(r.bundle.graph.nodes.size(), 72u);
  write_outputs(c, r);
  for (const char* f : {"summary.csv", "summary.json", "graph.json", "dendrogram.svg", "report.html", "run_meta.json"}) {
    EXPECT_TRUE(fs::exists(c.out / f)) << f;
  }
}

TEST(Pipeline, TwoArmRunIsSigned) {
  auto c = base_config("part1_two_arm.csv", "k2");
  const auto r = run_analysis(c);
  EXPECT_EQ(r.bundle.meta.k, 2u);
  bool negative = false;
  for (const auto& row : r.bundle.rows) {
    ASSERT_TRUE(row.sign.has_value());
    negative = negative || *row.adjusted_ic < 0.0;
  }
  EXPECT_TRUE(negative);
  EXPECT_NE(r.bundle.dendrogram_svg.find("Signed"), std::string::npos);

  c.two_sided = true;
  const auto two = run_analysis(c);
  for (const auto& row : two.bundle.rows) EXPECT_GE(*row.ic_lower, 0.0);
}

TEST(Pipeline, SingleArmRunUsesIncidence) {
  const auto c = base_config("part1_active_single_arm.csv", "k1");
  const auto r = run_analysis(c);
  EXPECT_EQ(r.bundle.meta.k, 1u);
  EXPECT_FALSE(r.stats.has_value());
  for (std::size_t i = 0; i < r.table.num_terms(); ++i) {
    EXPECT_DOUBLE_EQ(r.graph.weights[i], static_cast<double>(r.table.count(i, 0)) / 63.0);
    EXPECT_FALSE(r.bundle.rows[i].p_value.has_value());
  }
  EXPECT_FALSE(r.warnings.empty());  // zero-event PTs were dropped
}

TEST(Pipeline, MissingEmbeddingsFailOrAreSkipped) {
  const fs::path dir = fs::path(::testing::TempDir()) / "missing";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "table.csv");
    out << "pt,A|N=50,B|N=50\nMyocarditis,1,4\nKetonuria,0,3\nNot a real term,2,2\nRash,3,1\n";
  }
  auto c = base_config("table1.csv", "missing/out");
  c.input = dir / "table.csv";
  EXPECT_EQ(run_error(c), ErrorCode::MissingEmbedding);
  c.skip_missing = true;
  const auto r = run_analysis(c);
  EXPECT_EQ(r.bundle.meta.dropped_terms, (std::vector<std::string>{"Not a real term"}));
  EXPECT_EQ(r.bundle.rows.size(), 4u);
  EXPECT_EQ(r.bundle.graph.nodes.size(), 3u);
}

TEST(Pipeline, DataErrorsNameTheFile) {
  auto c = base_config("table1.csv", "err");
  c.input = testing::data_path("nope.csv");
  EXPECT_EQ(run_error(c), ErrorCode::IoError);
  c = base_config("table1.csv", "err");
  c.arms = {"Not an arm"};
  try {
    run_analysis(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    EXPECT_NE(std::string(e.what()).find("table1.csv"), std::string::npos);
  }
}

TEST(Pipeline, BadEndpointFailsBeforeReadingData) {
  auto c = base_config("table1.csv", "llm");
  c.input = testing::data_path("nope.csv");
  c.labeler = LabelerMode::Llm;
  c.llm_endpoint = "not a url";
  c.llm_model = "m";
  EXPECT_EQ(run_error(c), ErrorCode::ConfigError);
}

TEST(Pipeline, ViewerModes) {
  auto c = base_config("part1_two_arm.csv", "viewer");
  c.no_viewer = true;
  EXPECT_EQ(run_analysis(c).html.find("<script"), std::string::npos);
  c.no_viewer = false;
  c.viewer_assets = testing::data_path("no_such_viewer.js");
  EXPECT_EQ(run_error(c), ErrorCode::ConfigError);
}

TEST(Pipeline, HierarchyLabels) {
  auto c = base_config("part1_two_arm.csv", "hier");
  c.label_hierarchy = true;
  const auto r = run_analysis(c);
  EXPECT_EQ(r.bundle.hierarchy_labels.size(), r.tree.merges.size());
  if (!r.bundle.hierarchy_labels.empty()) {
    EXPECT_EQ(r.bundle.hierarchy_labels.back().member_pts.size(), r.tree.leaves.size());
  }
}

}  // namespace
}  // namespace shield
