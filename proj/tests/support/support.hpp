#pragma once

// Fixtures and independent reference implementations shared by the unit
// tests and the acceptance runner. Nothing here calls the code it checks.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "shield/cluster.hpp"
#include "shield/ingest.hpp"
#include "shield/matrix.hpp"
#include "shield/utility.hpp"

namespace shield::testing {

std::filesystem::path data_path(const std::string& name);
std::string read_text(const std::filesystem::path& path);
IncidenceTable load_table(const std::string& name, const std::vector<std::string>& arms = {});

struct ReferenceRow {
  std::string pt;
  std::string cluster;
  double adjusted = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double raw_ratio = 0.0;
  double p_value = 0.0;
  std::string p_text;
};

/// Reference summary values, one per Table 1 row, in fixture order.
std::vector<ReferenceRow> load_reference();

/// Brute-force Ward: every step recomputes the error-sum-of-squares increase
/// n_a n_b / (n_a + n_b) |c_a - c_b|^2 over all live pairs and merges the
/// smallest, ties to the smallest (left, right) node ids.
std::vector<Merge> brute_force_ward(const Matrix& points);

/// Method-of-moments hyperprior written out directly, for cross-checking.
struct OracleHyperprior {
  std::vector<double> alpha;
  double alpha0 = 0.0;
};
OracleHyperprior oracle_hyperprior(const IncidenceTable& table);

/// Random block-diagonal utility graph with shuffled node order.
struct BlockGraph {
  UtilityGraph graph;
  std::vector<std::size_t> block;  // per node
  std::size_t num_blocks = 0;
};
BlockGraph random_block_graph(std::mt19937_64& rng, std::size_t min_blocks = 2, std::size_t max_blocks = 5,
                              std::size_t max_nodes = 40);

/// True when the two labelings induce the same partition of their non-null
/// entries and agree on which entries are null.
bool same_partition(const std::vector<std::optional<std::size_t>>& a, const std::vector<std::size_t>& b);
bool same_partition(const std::vector<std::optional<std::size_t>>& a,
                    const std::vector<std::optional<std::size_t>>& b);

/// Table of `rows` PTs, each with `total` events split multinomially in
/// proportion to `n_subjects`.
IncidenceTable null_table(std::mt19937_64& rng, const std::vector<std::int64_t>& n_subjects,
                          std::size_t rows, std::int64_t total);

/// Random valid table with k arms, 1..max_rows rows and at least one event
/// per row.
IncidenceTable random_table(std::mt19937_64& rng, std::size_t k, std::size_t max_rows = 30);

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
double ks_uniform(std::vector<double> values);

struct ChiSquareReference {
  int df;
  double x;
  double q;
};

/// Upper-tail chi-square probabilities from a 50-digit mpmath evaluation.
const std::vector<ChiSquareReference>& chi_square_references();

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shield::testing
