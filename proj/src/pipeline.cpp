#include "shield/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "shield/embed.hpp"
#include "shield/label.hpp"
#include "shield/simd/kernels.hpp"
#include "shield/utility.hpp"

namespace shield {

namespace {

std::string bare_message(const Error& e) {
  const std::string what = e.what();
  const std::size_t skip = to_string(e.code()).size() + 2;
  return what.size() >= skip ? what.substr(skip) : what;
}

template <class F>
auto with_file_context(const std::filesystem::path& path, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + bare_message(e));
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return in;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::vector<std::string>> members_by_cluster(const ClusterTree& tree,
                                                         const std::vector<std::string>& terms) {
  std::vector<std::vector<std::string>> members(tree.num_clusters);
  for (std::size_t i = 0; i < tree.assignment.size(); ++i) {
    if (tree.assignment[i]) members[*tree.assignment[i]].push_back(terms[i]);
  }
  return members;
}

}  // namespace

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (!(c.tau >= 0.0 && c.tau < 1.0)) fail("sim-min must lie in [0, 1)");
  if (c.draws < 1000) fail("draws must be at least 1000");
  if (c.min_cluster_size < 1) fail("min-cluster-size must be at least 1");
  if (c.input.empty()) fail("no input table given");
  if (c.embeddings.empty()) fail("no embeddings file given");
  if (c.out.empty()) fail("no output directory given");
  if (c.labeler == LabelerMode::Llm) {
    if (c.llm_endpoint.empty()) fail("llm labeler needs an endpoint");
    if (c.llm_model.empty()) fail("llm labeler needs a model name");
    if (c.llm_max_in_flight < 1) fail("llm in-flight cap must be at least 1");
  }
}

std::string canonical_config(const RunConfig& c) {
  nlohmann::json j = {
      {"input", c.input.generic_string()},
      {"embeddings", c.embeddings.generic_string()},
      {"arms", c.arms},
      {"pt_column", c.pt_column},
      {"sim_min", c.tau},
      {"gamma", c.gamma},
      {"draws", c.draws},
      {"seed", c.seed},
      {"labeler", c.labeler == LabelerMode::Llm ? "llm" : "offline"},
      {"llm_endpoint", c.llm_endpoint},
      {"llm_model", c.llm_model},
      {"viewer_assets", c.viewer_assets ? c.viewer_assets->generic_string() : ""},
      {"skip_missing", c.skip_missing},
      {"no_viewer", c.no_viewer},
      {"two_sided", c.two_sided},
      {"label_hierarchy", c.label_hierarchy},
      {"summary", c.summary == SummaryStatistic::Mean ? "mean" : "median"},
      {"min_cluster_size", c.min_cluster_size},
  };
  return j.dump();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::ConfigError ? 1 : 2; }

AnalysisResult run_analysis(const RunConfig& config) {
  validate(config);

  // Endpoint problems surface before any data is read.
  std::unique_ptr<HttpLlmClient> client;
  if (config.labeler == LabelerMode::Llm) {
    const char* key = std::getenv("SHIELD_LLM_API_KEY");
    client = std::make_unique<HttpLlmClient>(
        LlmConfig{config.llm_endpoint, config.llm_model, key != nullptr ? key : "", std::chrono::seconds(30)});
  }
  std::string viewer;
  if (!config.no_viewer) {
    if (config.viewer_assets) {
      viewer = with_file_context(*config.viewer_assets, [&] {
        try {
          return read_file(*config.viewer_assets);
        } catch (const Error& e) {
          throw Error(ErrorCode::ConfigError, bare_message(e));
        }
      });
      if (viewer.empty()) throw Error(ErrorCode::ConfigError, "viewer assets file is empty");
    } else {
      viewer = stub_viewer_script();
    }
  }

  AnalysisResult result;
  const IncidenceTable raw = with_file_context(config.input, [&] {
    auto in = open_input(config.input);
    return parse_incidence_csv(in, config.arms, config.pt_column);
  });
  result.table = with_file_context(config.input, [&] { return filter_zero_rows(raw); });
  const IncidenceTable& table = result.table;
  if (table.num_terms() < raw.num_terms()) {
    result.warnings.push_back(std::to_string(raw.num_terms() - table.num_terms()) +
                              " PT(s) without any events were dropped");
  }
  const std::size_t k = table.num_arms();

  const EmbeddingStore store = with_file_context(config.embeddings, [&] {
    auto in = open_input(config.embeddings);
    return load_embeddings(in);
  });
  const auto missing = missing_terms(store, table.pt_names());
  if (!missing.empty() && !config.skip_missing) {
    // Reports every absent PT.
    with_file_context(config.embeddings, [&] { return cosine_similarity_submatrix(store, table.pt_names()); });
  }
  std::vector<std::size_t> embedded;
  {
    std::size_t next_missing = 0;
    for (std::size_t i = 0; i < table.num_terms(); ++i) {
      if (next_missing < missing.size() && missing[next_missing] == table.pt_names()[i]) {
        ++next_missing;
        continue;
      }
      embedded.push_back(i);
    }
  }
  for (const auto& pt : missing) result.warnings.push_back("no embedding for '" + pt + "'; PT left out of the graph");

  std::vector<std::string> graph_terms;
  for (std::size_t i : embedded) graph_terms.push_back(table.pt_names()[i]);
  const SimilarityMatrix sim = cosine_similarity_submatrix(store, graph_terms);
  const SimilarityMatrix s = threshold_similarity(sim, config.tau);

  if (k >= 2) {
    SignalOptions options;
    options.gamma = config.gamma;
    options.sampling.draws = config.draws;
    options.sampling.seed = config.seed;
    options.sampling.signed_two_arm = !config.two_sided;
    options.summary = config.summary;
    options.threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    result.stats = compute_signal_stats(table, options);
  }
  const auto* stats = result.stats ? &*result.stats : nullptr;

  const auto z_all = signal_weights(table, stats);
  std::vector<double> z;
  for (std::size_t i : embedded) z.push_back(z_all[i]);
  result.graph = utility_matrix(z, s);
  result.tree = cluster_graph(result.graph, {config.min_cluster_size, std::nullopt});
  const ClusterTree& tree = result.tree;

  // Full cosines for labeling: the medoid should not depend on tau.
  const auto clusters = members_by_cluster(tree, graph_terms);
  ReportBundle& bundle = result.bundle;
  bundle.clusters = label_clusters(clusters, sim, client.get(), config.llm_max_in_flight);
  if (config.label_hierarchy) {
    std::vector<std::vector<std::string>> internal;
    for (std::size_t t = 0; t < tree.merges.size(); ++t) {
      std::vector<std::string> pts;
      for (std::size_t leaf : subtree_leaves(tree.merges, tree.leaves.size(), tree.leaves.size() + t)) {
        pts.push_back(graph_terms[tree.leaves[leaf]]);
      }
      internal.push_back(std::move(pts));
    }
    bundle.hierarchy_labels = label_clusters(internal, sim, client.get(), config.llm_max_in_flight);
    for (std::size_t t = 0; t < bundle.hierarchy_labels.size(); ++t) {
      bundle.hierarchy_labels[t].cluster_id = tree.leaves.size() + t;
    }
  }

  ReportMeta& meta = bundle.meta;
  meta.k = k;
  meta.arm_names = table.arm_names();
  meta.gamma = config.gamma;
  meta.tau = config.tau;
  meta.draws = k >= 2 ? config.draws : 0;
  meta.seed = config.seed;
  meta.version = std::string(kVersion);
  meta.summary = config.summary == SummaryStatistic::Mean ? "mean" : "median";
  meta.dropped_terms = missing;

  bundle.rows = build_summary(table, stats, bundle.clusters);
  std::vector<SummaryRow> graph_rows;
  for (std::size_t i : embedded) graph_rows.push_back(bundle.rows[i]);
  bundle.graph = build_graph_export(result.graph, graph_rows, meta);

  DendrogramInput dendro;
  for (std::size_t leaf : tree.leaves) {
    const SummaryRow& row = graph_rows[leaf];
    dendro.leaf_names.push_back(row.pt);
    dendro.leaf_cluster.push_back(tree.assignment[leaf]);
    dendro.bar_value.push_back(k >= 2 ? *row.adjusted_ic : *row.incidence_proportion);
    dendro.bar_lower.push_back(row.ic_lower);
  }
  dendro.merges = tree.merges;
  for (const auto& label : bundle.clusters) dendro.cluster_labels.push_back(label.label);
  if (k == 1) {
    dendro.bar_caption = "Incidence proportion";
  } else if (k == 2 && !config.two_sided) {
    dendro.bar_caption = "Signed adjusted IC (bits)";
  } else {
    dendro.bar_caption = "Adjusted IC (bits)";
  }
  bundle.dendrogram_svg = render_dendrogram_svg(dendro);
  if (tree.leaves.empty()) result.warnings.push_back("no PT carries positive signal weight; nothing was clustered");

  result.html = render_html_report(bundle, viewer, config.no_viewer);
  return result;
}

void write_outputs(const RunConfig& config, const AnalysisResult& result) {
  write_report_files(result.bundle, result.html, config.out);
  const nlohmann::json meta = {
      {"version", std::string(kVersion)},
      {"config_hash", config_hash(config)},
      {"config", nlohmann::json::parse(canonical_config(config))},
      {"timestamp", utc_timestamp()},
      {"simd", std::string(simd::to_string(simd::active_isa()))},
      {"num_terms", result.table.num_terms()},
      {"num_clusters", result.tree.num_clusters},
      {"num_spectral", result.tree.num_spectral},
      {"warnings", result.warnings},
  };
  const auto path = config.out / "run_meta.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

}  // namespace shield
