#pragma once

// Spectral embedding of the utility graph followed by Ward agglomeration and
// an adaptive largest-gap dendrogram cut.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "shield/matrix.hpp"
#include "shield/utility.hpp"

namespace shield {

struct Laplacian {
  Matrix matrix;                      // over active nodes only
  std::vector<std::size_t> active;    // graph index of each Laplacian row
  std::vector<std::size_t> isolated;  // graph indices with degree <= eps
};

/// L = I - D^{-1/2} U D^{-1/2} with D_ii = sum_j U_ij (self-loops included).
/// Nodes with D_ii <= 1e-12 are left out. Throws EmptyGraph when every node
/// is isolated.
Laplacian normalized_laplacian(const UtilityGraph& u);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column r pairs with values[r]
};

/// Symmetric eigendecomposition. Each eigenvector's largest-magnitude
/// component is made positive (first such index on ties).
EigenDecomposition eigendecompose(const Matrix& symmetric);

/// Count of eigenvalues below `zero_tol`, clamped to [1, n - 1]. With no
/// eigenvalue below the tolerance, the position of the largest relative gap
/// among the first min(n, 20) eigenvalues.
std::size_t estimate_num_clusters(std::span<const double> eigenvalues, double zero_tol);

/// Default tolerance: 1e-8 * largest eigenvalue.
double default_zero_tolerance(std::span<const double> eigenvalues);

struct SpectralEmbedding {
  Matrix points;                             // n x q, unit rows
  std::vector<std::size_t> degenerate_rows;  // rows that had ~zero norm
};

SpectralEmbedding spectral_embedding(const EigenDecomposition& eig, std::size_t q);

/// One agglomeration step. Leaves are 0..n-1; merge t creates node n + t.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;  // sqrt of the Lance-Williams Ward distance
  std::size_t size = 0;
};

/// Ward linkage via the Lance-Williams update on squared Euclidean
/// distances. Equal distances merge the lexicographically smallest
/// (left, right) node-id pair first. Fewer than two points give no merges.
std::vector<Merge> ward_linkage(const Matrix& points);

/// Flat clusters from the largest gap between successive merge distances
/// (later merge on ties; a single cluster when there is no positive gap).
/// Clusters smaller than `min_cluster_size` map to nullopt. Cluster ids are
/// dense and numbered by first member leaf.
std::vector<std::optional<std::size_t>> cut_by_gap(std::span<const Merge> merges,
                                                   std::size_t num_leaves,
                                                   std::size_t min_cluster_size = 2);

/// Leaves of the subtree rooted at `node`, left to right.
std::vector<std::size_t> subtree_leaves(std::span<const Merge> merges, std::size_t num_leaves,
                                        std::size_t node);

struct ClusterOptions {
  std::size_t min_cluster_size = 2;
  std::optional<double> zero_tol;  // default: default_zero_tolerance
};

struct ClusterTree {
  std::vector<std::size_t> leaves;  // graph index of each dendrogram leaf
  std::vector<std::size_t> isolated;
  std::vector<Merge> merges;
  std::vector<double> eigenvalues;
  std::size_t num_spectral = 0;  // q
  /// Per graph node: flat cluster or nullopt (isolated or undersized).
  std::vector<std::optional<std::size_t>> assignment;
  std::size_t num_clusters = 0;
  std::vector<std::size_t> degenerate_rows;
};

/// Full chain: Laplacian -> eigenpairs -> q -> embedding -> Ward -> gap cut.
/// Every node isolated yields an empty tree with all assignments nullopt.
ClusterTree cluster_graph(const UtilityGraph& u, const ClusterOptions& options = {});

}  // namespace shield
