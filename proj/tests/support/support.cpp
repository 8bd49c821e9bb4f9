#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace shield::testing {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SHIELD_TEST_DATA_DIR) / name;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

IncidenceTable load_table(const std::string& name, const std::vector<std::string>& arms) {
  std::ifstream in(data_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture " + name);
  return parse_incidence_csv(in, arms);
}

std::vector<ReferenceRow> load_reference() {
  std::istringstream in(read_text(data_path("table1_reference.csv")));
  std::string line;
  std::getline(in, line);
  std::vector<ReferenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw std::runtime_error("bad reference row: " + line);
    rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                    std::stod(f[6]), f[6]});
  }
  return rows;
}

std::vector<Merge> brute_force_ward(const Matrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  struct Group {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  std::vector<Group> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}});

  auto centroid = [&](const Group& g) {
    std::vector<double> c(d, 0.0);
    for (std::size_t i : g.members) {
      for (std::size_t j = 0; j < d; ++j) c[j] += points(i, j);
    }
    for (double& v : c) v /= static_cast<double>(g.members.size());
    return c;
  };
  auto increase = [&](const Group& a, const Group& b) {
    const auto ca = centroid(a), cb = centroid(b);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += (ca[j] - cb[j]) * (ca[j] - cb[j]);
    const double na = static_cast<double>(a.members.size());
    const double nb = static_cast<double>(b.members.size());
    return na * nb / (na + nb) * sq;
  };

  std::vector<Merge> merges;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::tuple<double, std::size_t, std::size_t> best{std::numeric_limits<double>::infinity(), 0, 0};
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        const auto lo = std::min(live[i].id, live[j].id), hi = std::max(live[i].id, live[j].id);
        const std::tuple<double, std::size_t, std::size_t> key{increase(live[i], live[j]), lo, hi};
        if (key < best) {
          best = key;
          bi = i;
          bj = j;
        }
      }
    }
    Group merged{n + step, live[bi].members};
    merged.members.insert(merged.members.end(), live[bj].members.begin(), live[bj].members.end());
    // Ward distance convention: sqrt(2 * ESS increase).
    merges.push_back({std::get<1>(best), std::get<2>(best), std::sqrt(2.0 * std::get<0>(best)),
                      merged.members.size()});
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
    live[bi] = std::move(merged);
  }
  return merges;
}

OracleHyperprior oracle_hyperprior(const IncidenceTable& table) {
  const std::size_t m = table.num_terms(), k = table.num_arms();
  std::vector<double> mu(k), cand(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i) {
      p[i] = static_cast<double>(table.count(i, j)) / (static_cast<double>(table.row_total(i)) + 1e-12);
    }
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(m);
    double ss = 0.0;
    for (double v : p) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(m - 1);
    mu[j] = mean;
    cand[j] = var > 0.0 ? mean * (1.0 - mean) / var - 1.0 : std::numeric_limits<double>::infinity();
  }
  std::sort(cand.begin(), cand.end());
  double med = k % 2 == 1 ? cand[k / 2] : 0.5 * (cand[k / 2 - 1] + cand[k / 2]);
  med = std::min(std::max(med, 0.5), 1000.0);
  OracleHyperprior out;
  for (std::size_t j = 0; j < k; ++j) out.alpha.push_back(std::max(med * mu[j], 0.1));
  out.alpha0 = std::accumulate(out.alpha.begin(), out.alpha.end(), 0.0);
  return out;
}

BlockGraph random_block_graph(std::mt19937_64& rng, std::size_t min_blocks, std::size_t max_blocks,
                              std::size_t max_nodes) {
  std::uniform_int_distribution<std::size_t> nb(min_blocks, max_blocks);
  const std::size_t b = nb(rng);
  std::uniform_int_distribution<std::size_t> size(2, max_nodes / b);
  std::vector<std::size_t> block;
  for (std::size_t c = 0; c < b; ++c) block.insert(block.end(), size(rng), c);
  std::shuffle(block.begin(), block.end(), rng);

  const std::size_t n = block.size();
  std::uniform_real_distribution<double> w(0.1, 1.0);
  BlockGraph out;
  out.block = block;
  out.num_blocks = b;
  out.graph.matrix = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.graph.terms.push_back("PT" + std::to_string(i));
    out.graph.weights.push_back(1.0);
    out.graph.matrix(i, i) = w(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (block[i] == block[j]) {
        const double v = w(rng);
        out.graph.matrix(i, j) = v;
        out.graph.matrix(j, i) = v;
      }
    }
  }
  return out;
}

namespace {

template <class A, class B>
bool partition_match(const std::vector<A>& a, const std::vector<B>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].has_value() != b[i].has_value()) return false;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (!a[i] || !a[j]) continue;
      if ((*a[i] == *a[j]) != (*b[i] == *b[j])) return false;
    }
  }
  return true;
}

}  // namespace

bool same_partition(const std::vector<std::optional<std::size_t>>& a, const std::vector<std::size_t>& b) {
  std::vector<std::optional<std::size_t>> bb(b.begin(), b.end());
  return partition_match(a, bb);
}

bool same_partition(const std::vector<std::optional<std::size_t>>& a,
                    const std::vector<std::optional<std::size_t>>& b) {
  return partition_match(a, b);
}

IncidenceTable null_table(std::mt19937_64& rng, const std::vector<std::int64_t>& n_subjects,
                          std::size_t rows, std::int64_t total) {
  const std::size_t k = n_subjects.size();
  std::discrete_distribution<std::size_t> arm(n_subjects.begin(), n_subjects.end());
  std::vector<std::string> pts, arms;
  std::vector<std::int64_t> counts;
  for (std::size_t j = 0; j < k; ++j) arms.push_back("arm" + std::to_string(j));
  for (std::size_t i = 0; i < rows; ++i) {
    pts.push_back("PT" + std::to_string(i));
    std::vector<std::int64_t> c(k, 0);
    for (std::int64_t e = 0; e < total; ++e) ++c[arm(rng)];
    counts.insert(counts.end(), c.begin(), c.end());
  }
  return IncidenceTable(pts, arms, n_subjects, counts);
}

IncidenceTable random_table(std::mt19937_64& rng, std::size_t k, std::size_t max_rows) {
  std::uniform_int_distribution<std::size_t> rows(1, max_rows);
  std::uniform_int_distribution<std::int64_t> size(5, 200);
  const std::size_t m = rows(rng);
  std::vector<std::int64_t> n(k);
  for (auto& v : n) v = size(rng);
  std::vector<std::string> pts, arms;
  std::vector<std::int64_t> counts;
  for (std::size_t j = 0; j < k; ++j) arms.push_back("arm" + std::to_string(j));
  for (std::size_t i = 0; i < m; ++i) {
    pts.push_back("PT" + std::to_string(i));
    std::int64_t total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      // Mostly rare events, as in adverse-event tables.
      const std::int64_t cap = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? n[j] : std::min<std::int64_t>(n[j], 5);
      const std::int64_t c = std::uniform_int_distribution<std::int64_t>(0, cap)(rng);
      counts.push_back(c);
      total += c;
    }
    if (total == 0) counts[counts.size() - k] = 1;
  }
  return IncidenceTable(pts, arms, n, counts);
}

double ks_uniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - values[i], values[i] - static_cast<double>(i) / n});
  }
  return d;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

const std::vector<ChiSquareReference>& chi_square_references() {
  static const std::vector<ChiSquareReference> refs{
      {1, 0.0, 1.0},
      {1, 3.841458820694124, 0.05000000000000005743536969},
      {3, 8.515, 0.03648507398710421851962484},
      {2, 0.5, 0.7788007830714048682451703},
      {4, 0.001, 0.9999998750416588552082196},
      {5, 100.0, 5.285148360943240056365998e-20},
      {10, 100.0, 5.449701982920529335093332e-17},
      {7, 2.5, 0.927097065013473765008492},
      {6, 12.0, 0.06196880441665896057612919},
      {9, 30.0, 0.0004387217709794794889536495},
      {8, 0.1, 0.9999997497860527002658286},
      {10, 9.342, 0.4999830783803410188705415},
      {1, 50.0, 1.537459794428034850188343e-12},
      {2, 20.0, 0.00004539992976248485153559152},
      {3, 0.25, 0.9691404042162732704992712},
      {4, 7.779, 0.1000175157102452709855773},
      {5, 15.086, 0.01000112476218585566960517},
      {6, 5.0, 0.5438131158833295179981275},
      {9, 1.0, 0.9994375026978324984500848},
      {10, 60.0, 3.624300952061488026229951e-9},
  };
  return refs;
}

}  // namespace shield::testing
