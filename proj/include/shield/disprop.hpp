#pragma once

// Information Component disproportionality: raw IC (KL divergence of the
// arm distribution given an event from the expected arm distribution), the
// matching G-test, and Dirichlet-multinomial posterior shrinkage.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shield/ingest.hpp"
#include "shield/matrix.hpp"

namespace shield {

inline constexpr double kEpsilon = 1e-12;

/// E_ij = T_i N_j / N_tot
Matrix expected_counts(const IncidenceTable& table);

struct RawIc {
  std::vector<double> ic;  // bits, one per PT
  Matrix pmi;              // log2((c + eps) / (E + eps))
};

RawIc raw_ic(const IncidenceTable& table, const Matrix& expected);
RawIc raw_ic(const IncidenceTable& table);

struct GTest {
  double g_stat = 0.0;
  double p_value = 1.0;
};

/// G_i = 2 T_i IC_i ln 2 against chi-square(k - 1). Throws NotApplicable
/// for single-arm tables.
std::vector<GTest> g_test(const IncidenceTable& table, std::span<const double> raw_ic);

/// +1 when the second arm exceeds its expected count, -1 otherwise (ties
/// included). Throws NotApplicable unless k == 2.
std::vector<int> sign_two_arm(const IncidenceTable& table, const Matrix& expected);

struct HyperpriorOptions {
  double alpha_min = 0.5;
  double alpha_max = 1000.0;
  double alpha_floor = 0.1;
};

struct DirichletPrior {
  std::vector<double> alpha;
  double alpha0 = 0.0;  // sum of alpha
};

struct HyperpriorEstimate {
  DirichletPrior prior;
  std::vector<double> arm_means;       // mu_j
  std::vector<double> arm_variances;   // unbiased, across PTs
  std::vector<double> candidates;      // per-arm alpha0 candidates (+inf when variance is 0)
  double concentration = 0.0;          // clamped median of the candidates
  bool degenerate_variance = false;    // every arm had zero variance
};

/// mu (1 - mu) / var - 1; +inf when var == 0.
double moment_concentration(double mean, double variance);

/// Method-of-moments Dirichlet hyperprior across PTs. Throws
/// InsufficientData with fewer than two PTs.
HyperpriorEstimate estimate_hyperprior(const IncidenceTable& table,
                                       const HyperpriorOptions& options = {});

struct PosteriorSamples {
  std::vector<double> ic;  // bits, one per draw
  Matrix rr;               // draws x k relative risks
};

struct SamplingOptions {
  std::size_t draws = 20000;
  std::uint64_t seed = 42;
  /// k == 2 only: sign each draw's IC by whether the second arm's sampled
  /// share exceeds its expected share.
  bool signed_two_arm = true;
};

/// Dirichlet(c + alpha) draws via normalized Gamma variates, turned into IC
/// and RR samples against the expected arm distribution E / sum(E). The
/// stream is fixed by substream_seed(seed, pt_index).
PosteriorSamples posterior_samples(std::span<const std::int64_t> counts, const DirichletPrior& prior,
                                   std::span<const double> expected, const SamplingOptions& options,
                                   std::uint64_t pt_index = 0);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Linear-interpolation quantile at position p (n - 1) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Mean, median and the equal-tailed interval at level gamma.
Summary posterior_summaries(std::span<const double> samples, double gamma);

enum class SummaryStatistic { Median, Mean };

struct SignalOptions {
  double gamma = 0.95;
  SamplingOptions sampling;
  HyperpriorOptions hyperprior;
  SummaryStatistic summary = SummaryStatistic::Median;
  /// Worker threads for per-PT sampling; results do not depend on it.
  unsigned threads = 1;
};

struct TermSignal {
  double raw_ic = 0.0;
  double g_stat = 0.0;
  double p_value = 1.0;
  std::optional<int> sign;  // k == 2 only
  Summary ic;
  std::vector<Summary> rr;  // per arm
  std::vector<double> expected;

  /// IC summary chosen for reporting (median by default).
  double adjusted_ic(SummaryStatistic which) const {
    return which == SummaryStatistic::Mean ? ic.mean : ic.median;
  }
};

struct SignalStats {
  std::vector<TermSignal> terms;
  HyperpriorEstimate hyperprior;
  SummaryStatistic summary = SummaryStatistic::Median;
  double gamma = 0.95;
};

/// Full per-PT statistics for a filtered table with k >= 2.
SignalStats compute_signal_stats(const IncidenceTable& table, const SignalOptions& options = {});

}  // namespace shield
