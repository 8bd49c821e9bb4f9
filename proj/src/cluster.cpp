#include "shield/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "shield/disprop.hpp"
#include "shield/error.hpp"
#include "shield/simd/kernels.hpp"

namespace shield {

Laplacian normalized_laplacian(const UtilityGraph& u) {
  const std::size_t m = u.size();
  Laplacian out;
  std::vector<double> degree(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = u.matrix.row(i);
    degree[i] = std::accumulate(r.begin(), r.end(), 0.0);
    (degree[i] > kEpsilon ? out.active : out.isolated).push_back(i);
  }
  if (out.active.empty()) throw Error(ErrorCode::EmptyGraph, "every PT is isolated in the utility graph");

  const std::size_t n = out.active.size();
  std::vector<double> inv_sqrt(n);
  for (std::size_t a = 0; a < n; ++a) inv_sqrt[a] = 1.0 / std::sqrt(degree[out.active[a]]);

  Matrix sub(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) sub(a, b) = u.matrix(out.active[a], out.active[b]);
  }
  out.matrix = Matrix(n, n);
  std::vector<double> scaled(n);
  for (std::size_t a = 0; a < n; ++a) {
    simd::scaled_product(sub.row(a), inv_sqrt[a], inv_sqrt, scaled);
    out.matrix(a, a) = 1.0 - scaled[a];
    for (std::size_t b = a + 1; b < n; ++b) {
      out.matrix(a, b) = -scaled[b];
      out.matrix(b, a) = -scaled[b];
    }
  }
  return out;
}

EigenDecomposition eigendecompose(const Matrix& symmetric) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorCode::InvalidArgument, "eigendecompose needs a square matrix");
  EigenDecomposition out{{}, Matrix(n, n)};
  if (n == 0) return out;

  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = symmetric(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InternalError, "symmetric eigensolver did not converge");
  }
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  out.values.assign(values.data(), values.data() + n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(vectors(i, r)) > std::abs(vectors(peak, r))) peak = i;
    }
    const double flip = vectors(peak, r) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, r) = flip * vectors(i, r);
  }
  return out;
}

double default_zero_tolerance(std::span<const double> eigenvalues) {
  const double top = eigenvalues.empty() ? 0.0 : eigenvalues.back();
  return 1e-8 * std::max(top, 1.0);
}

std::size_t estimate_num_clusters(std::span<const double> eigenvalues, double zero_tol) {
  const std::size_t n = eigenvalues.size();
  if (n <= 2) return 1;
  std::size_t q = static_cast<std::size_t>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double v) { return v < zero_tol; }));
  if (q == 0) {
    const std::size_t limit = std::min<std::size_t>(n, 20);
    double best = -1.0;
    for (std::size_t r = 0; r + 1 < limit; ++r) {
      const double next = eigenvalues[r + 1];
      const double gap = next > 0.0 ? (next - eigenvalues[r]) / next : 0.0;
      if (gap > best) {
        best = gap;
        q = r + 1;
      }
    }
  }
  return std::clamp<std::size_t>(q, 1, n - 1);
}

SpectralEmbedding spectral_embedding(const EigenDecomposition& eig, std::size_t q) {
  const std::size_t n = eig.vectors.rows();
  if (q < 1 || q > eig.vectors.cols()) {
    throw Error(ErrorCode::InvalidArgument, "embedding width must lie in [1, n]");
  }
  SpectralEmbedding out{Matrix(n, q), {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.points.row(i);
    for (std::size_t c = 0; c < q; ++c) row[c] = eig.vectors(i, c);
    const double norm = std::sqrt(simd::dot(row, row));
    if (norm < 1e-12) {
      std::fill(row.begin(), row.end(), 0.0);
      row[0] = 1.0;
      out.degenerate_rows.push_back(i);
    } else {
      simd::scale_in_place(row, 1.0 / norm);
    }
  }
  return out;
}

namespace {

struct PairKey {
  double distance = std::numeric_limits<double>::infinity();
  std::size_t lo = std::numeric_limits<std::size_t>::max();
  std::size_t hi = std::numeric_limits<std::size_t>::max();

  friend bool operator<(const PairKey& a, const PairKey& b) {
    return std::tie(a.distance, a.lo, a.hi) < std::tie(b.distance, b.lo, b.hi);
  }
};

}  // namespace

std::vector<Merge> ward_linkage(const Matrix& points) {
  const std::size_t n = points.rows();
  std::vector<Merge> merges;
  if (n < 2) return merges;
  merges.reserve(n - 1);

  Matrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = simd::squared_distance(points.row(i), points.row(j));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), std::size_t{0});
  std::vector<char> alive(n, 1);
  std::vector<std::size_t> partner(n, 0);
  std::vector<PairKey> best(n);

  auto key = [&](std::size_t a, std::size_t b) {
    return PairKey{dist(a, b), std::min(node[a], node[b]), std::max(node[a], node[b])};
  };
  auto rescan = [&](std::size_t a) {
    best[a] = PairKey{};
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a || !alive[b]) continue;
      const PairKey k = key(a, b);
      if (k < best[a]) {
        best[a] = k;
        partner[a] = b;
      }
    }
  };
  for (std::size_t a = 0; a < n; ++a) rescan(a);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    for (std::size_t s = 0; s < n; ++s) {
      if (alive[s] && (a == n || best[s] < best[a])) a = s;
    }
    std::size_t b = partner[a];
    if (b < a) std::swap(a, b);  // the merged cluster lives in the lower slot

    const double d_ab = dist(a, b);
    merges.push_back({std::min(node[a], node[b]), std::max(node[a], node[b]),
                      std::sqrt(std::max(d_ab, 0.0)), size[a] + size[b]});

    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == a || k == b) continue;
      const double nk = static_cast<double>(size[k]);
      const double d = ((na + nk) * dist(k, a) + (nb + nk) * dist(k, b) - nk * d_ab) / (na + nb + nk);
      dist(k, a) = d;
      dist(a, k) = d;
    }
    alive[b] = 0;
    size[a] += size[b];
    node[a] = n + step;

    rescan(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == a) continue;
      if (partner[k] == a || partner[k] == b) {
        rescan(k);
      } else if (const PairKey candidate = key(k, a); candidate < best[k]) {
        best[k] = candidate;
        partner[k] = a;
      }
    }
  }
  return merges;
}

std::vector<std::optional<std::size_t>> cut_by_gap(std::span<const Merge> merges,
                                                   std::size_t num_leaves,
                                                   std::size_t min_cluster_size) {
  std::size_t applied = merges.size();
  if (merges.size() >= 2) {
    double widest = 0.0;
    std::size_t at = 0;
    for (std::size_t t = 1; t < merges.size(); ++t) {
      const double gap = merges[t].distance - merges[t - 1].distance;
      if (gap >= widest && gap > 0.0) {
        widest = gap;
        at = t;
      }
    }
    if (widest > 0.0) applied = at;
  }

  // Union the first `applied` merges; node ids >= num_leaves are internal.
  std::vector<std::size_t> parent(num_leaves + merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t t = 0; t < applied; ++t) {
    const std::size_t id = num_leaves + t;
    parent[find(merges[t].left)] = id;
    parent[find(merges[t].right)] = id;
  }

  std::vector<std::size_t> root(num_leaves), members(parent.size(), 0);
  for (std::size_t leaf = 0; leaf < num_leaves; ++leaf) {
    root[leaf] = find(leaf);
    ++members[root[leaf]];
  }
  std::vector<std::optional<std::size_t>> label_of_root(parent.size());
  std::vector<std::optional<std::size_t>> out(num_leaves);
  std::size_t next = 0;
  for (std::size_t leaf = 0; leaf < num_leaves; ++leaf) {
    const std::size_t r = root[leaf];
    if (members[r] < min_cluster_size) continue;
    if (!label_of_root[r]) label_of_root[r] = next++;
    out[leaf] = label_of_root[r];
  }
  return out;
}

std::vector<std::size_t> subtree_leaves(std::span<const Merge> merges, std::size_t num_leaves,
                                        std::size_t node) {
  std::vector<std::size_t> leaves;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    if (x < num_leaves) {
      leaves.push_back(x);
      continue;
    }
    if (x - num_leaves >= merges.size()) throw Error(ErrorCode::InvalidArgument, "node id out of range");
    const Merge& mg = merges[x - num_leaves];
    stack.push_back(mg.right);
    stack.push_back(mg.left);
  }
  return leaves;
}

ClusterTree cluster_graph(const UtilityGraph& u, const ClusterOptions& options) {
  ClusterTree tree;
  tree.assignment.assign(u.size(), std::nullopt);

  Laplacian lap;
  try {
    lap = normalized_laplacian(u);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyGraph) throw;
    tree.isolated.resize(u.size());
    std::iota(tree.isolated.begin(), tree.isolated.end(), std::size_t{0});
    return tree;
  }
  tree.leaves = lap.active;
  tree.isolated = lap.isolated;

  const auto eig = eigendecompose(lap.matrix);
  tree.eigenvalues = eig.values;
  const double tol = options.zero_tol.value_or(default_zero_tolerance(eig.values));
  tree.num_spectral = estimate_num_clusters(eig.values, tol);

  const auto embedding = spectral_embedding(eig, tree.num_spectral);
  tree.degenerate_rows = embedding.degenerate_rows;
  tree.merges = ward_linkage(embedding.points);

  const auto flat = cut_by_gap(tree.merges, tree.leaves.size(), options.min_cluster_size);
  for (std::size_t leaf = 0; leaf < flat.size(); ++leaf) {
    tree.assignment[tree.leaves[leaf]] = flat[leaf];
    if (flat[leaf]) tree.num_clusters = std::max(tree.num_clusters, *flat[leaf] + 1);
  }
  return tree;
}

}  // namespace shield
