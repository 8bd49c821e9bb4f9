#include "shield/disprop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "shield/error.hpp"
#include "shield/random.hpp"
#include "shield/special.hpp"

namespace shield {

Matrix expected_counts(const IncidenceTable& table) {
  const std::size_t m = table.num_terms();
  const std::size_t k = table.num_arms();
  const double n_tot = static_cast<double>(table.total_subjects());
  Matrix e(m, k);
  for (std::size_t i = 0; i < m; ++i) {
    const double p_global = static_cast<double>(table.row_total(i)) / n_tot;
    for (std::size_t j = 0; j < k; ++j) {
      e(i, j) = p_global * static_cast<double>(table.n_subjects()[j]);
    }
  }
  return e;
}

RawIc raw_ic(const IncidenceTable& table, const Matrix& expected) {
  const std::size_t m = table.num_terms();
  const std::size_t k = table.num_arms();
  if (expected.rows() != m || expected.cols() != k) {
    throw Error(ErrorCode::InvalidArgument, "expected-count matrix shape does not match table");
  }
  RawIc out{std::vector<double>(m, 0.0), Matrix(m, k)};
  for (std::size_t i = 0; i < m; ++i) {
    const double total = static_cast<double>(table.row_total(i));
    double ic = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double c = static_cast<double>(table.count(i, j));
      const double pmi = std::log2((c + kEpsilon) / (expected(i, j) + kEpsilon));
      out.pmi(i, j) = pmi;
      // Zero cells contribute exactly zero: p(j|i) = 0 multiplies the PMI.
      if (table.count(i, j) > 0) ic += (c / (total + kEpsilon)) * pmi;
    }
    out.ic[i] = ic;
  }
  return out;
}

RawIc raw_ic(const IncidenceTable& table) { return raw_ic(table, expected_counts(table)); }

std::vector<GTest> g_test(const IncidenceTable& table, std::span<const double> raw_ic) {
  const std::size_t k = table.num_arms();
  if (k < 2) throw Error(ErrorCode::NotApplicable, "G-test needs at least two arms");
  if (raw_ic.size() != table.num_terms()) {
    throw Error(ErrorCode::InvalidArgument, "one raw IC value is required per PT");
  }
  const int df = static_cast<int>(k) - 1;
  std::vector<GTest> out(raw_ic.size());
  for (std::size_t i = 0; i < raw_ic.size(); ++i) {
    const double total = static_cast<double>(table.row_total(i));
    const double g = std::max(0.0, 2.0 * total * raw_ic[i] * std::numbers::ln2);
    out[i] = {g, chi_square_sf(g, df)};
  }
  return out;
}

std::vector<int> sign_two_arm(const IncidenceTable& table, const Matrix& expected) {
  if (table.num_arms() != 2) {
    throw Error(ErrorCode::NotApplicable, "directional sign is defined for two arms only");
  }
  std::vector<int> sign(table.num_terms());
  for (std::size_t i = 0; i < table.num_terms(); ++i) {
    sign[i] = static_cast<double>(table.count(i, 1)) > expected(i, 1) ? +1 : -1;
  }
  return sign;
}

double moment_concentration(double mean, double variance) {
  if (variance == 0.0) return std::numeric_limits<double>::infinity();
  return mean * (1.0 - mean) / variance - 1.0;
}

HyperpriorEstimate estimate_hyperprior(const IncidenceTable& table,
                                       const HyperpriorOptions& options) {
  const std::size_t m = table.num_terms();
  const std::size_t k = table.num_arms();
  if (m < 2) {
    throw Error(ErrorCode::InsufficientData, "hyperprior estimation needs at least two PTs");
  }

  HyperpriorEstimate est;
  est.arm_means.assign(k, 0.0);
  est.arm_variances.assign(k, 0.0);
  Matrix share(m, k);
  for (std::size_t i = 0; i < m; ++i) {
    const double total = static_cast<double>(table.row_total(i));
    for (std::size_t j = 0; j < k; ++j) {
      share(i, j) = static_cast<double>(table.count(i, j)) / (total + kEpsilon);
      est.arm_means[j] += share(i, j);
    }
  }
  for (double& mu : est.arm_means) mu /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = share(i, j) - est.arm_means[j];
      est.arm_variances[j] += d * d;
    }
  }
  for (double& var : est.arm_variances) var /= static_cast<double>(m - 1);

  est.candidates.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    est.candidates[j] = moment_concentration(est.arm_means[j], est.arm_variances[j]);
  }
  est.degenerate_variance = std::all_of(est.arm_variances.begin(), est.arm_variances.end(),
                                        [](double v) { return v == 0.0; });

  std::vector<double> sorted = est.candidates;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  double median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    // Average the middle pair; an infinite member keeps the median infinite.
    median = std::isinf(sorted[mid]) ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  }
  est.concentration = std::clamp(median, options.alpha_min, options.alpha_max);

  est.prior.alpha.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    est.prior.alpha[j] = std::max(est.concentration * est.arm_means[j], options.alpha_floor);
  }
  est.prior.alpha0 = std::accumulate(est.prior.alpha.begin(), est.prior.alpha.end(), 0.0);
  return est;
}

PosteriorSamples posterior_samples(std::span<const std::int64_t> counts, const DirichletPrior& prior,
                                   std::span<const double> expected, const SamplingOptions& options,
                                   std::uint64_t pt_index) {
  const std::size_t k = counts.size();
  if (prior.alpha.size() != k || expected.size() != k) {
    throw Error(ErrorCode::InvalidArgument, "counts, prior and expected must have equal length");
  }
  if (options.draws == 0) throw Error(ErrorCode::InvalidArgument, "draws must be positive");
  const double expected_total = std::accumulate(expected.begin(), expected.end(), 0.0);
  if (!(expected_total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "expected counts must have a positive total");
  }

  std::vector<double> shape(k), null_share(k);
  for (std::size_t j = 0; j < k; ++j) {
    shape[j] = static_cast<double>(counts[j]) + prior.alpha[j];
    null_share[j] = expected[j] / expected_total;
    if (!(shape[j] > 0.0)) throw Error(ErrorCode::InvalidArgument, "Dirichlet shape must be > 0");
  }

  PosteriorSamples out{std::vector<double>(options.draws), Matrix(options.draws, k)};
  Rng rng(substream_seed(options.seed, pt_index));
  std::vector<double> y(k);
  for (std::size_t s = 0; s < options.draws; ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      y[j] = rng.gamma(shape[j]);
      sum += y[j];
    }
    double ic = 0.0;
    auto rr = out.rr.row(s);
    for (std::size_t j = 0; j < k; ++j) {
      const double pi = y[j] / sum;
      rr[j] = pi / null_share[j];
      if (pi > 0.0) ic += pi * std::log2(rr[j]);
    }
    // KL divergence is nonnegative; drop rounding residue below zero.
    ic = std::max(ic, 0.0);
    if (k == 2 && options.signed_two_arm) {
      ic = y[1] / sum > null_share[1] ? ic : -ic;
    }
    out.ic[s] = ic;
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary posterior_summaries(std::span<const double> samples, double gamma) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no posterior samples");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "credible level must lie in (0, 1)");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  Summary s;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.median = quantile_sorted(sorted, 0.5);
  s.lower = quantile_sorted(sorted, (1.0 - gamma) / 2.0);
  s.upper = quantile_sorted(sorted, 1.0 - (1.0 - gamma) / 2.0);
  // Keep lower <= median <= upper and mean inside [min, max] despite rounding.
  s.mean = std::clamp(s.mean, sorted.front(), sorted.back());
  return s;
}

SignalStats compute_signal_stats(const IncidenceTable& table, const SignalOptions& options) {
  const std::size_t m = table.num_terms();
  const std::size_t k = table.num_arms();
  if (k < 2) throw Error(ErrorCode::NotApplicable, "disproportionality needs at least two arms");

  const Matrix expected = expected_counts(table);
  const RawIc raw = raw_ic(table, expected);
  const auto tests = g_test(table, raw.ic);
  std::optional<std::vector<int>> signs;
  if (k == 2) signs = sign_two_arm(table, expected);

  SignalStats stats;
  stats.hyperprior = estimate_hyperprior(table, options.hyperprior);
  stats.summary = options.summary;
  stats.gamma = options.gamma;
  stats.terms.resize(m);

  auto work = [&](std::size_t i) {
    TermSignal& t = stats.terms[i];
    t.raw_ic = raw.ic[i];
    t.g_stat = tests[i].g_stat;
    t.p_value = tests[i].p_value;
    if (signs) t.sign = (*signs)[i];
    const auto e = expected.row(i);
    t.expected.assign(e.begin(), e.end());

    const auto draws = posterior_samples(table.row(i), stats.hyperprior.prior, e, options.sampling, i);
    t.ic = posterior_summaries(draws.ic, options.gamma);
    t.rr.resize(k);
    std::vector<double> column(draws.rr.rows());
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t s = 0; s < column.size(); ++s) column[s] = draws.rr(s, j);
      t.rr[j] = posterior_summaries(column, options.gamma);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(m)));
  if (workers == 1) {
    for (std::size_t i = 0; i < m; ++i) work(i);
    return stats;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < m && !failed; i = next++) {
          try {
            work(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return stats;
}

}  // namespace shield
