#ifndef GRADREC_HARNESS_HPP
#define GRADREC_HARNESS_HPP

/**
 * \file harness.hpp
 * \brief Monte Carlo driver over (sparsity, available-sample count) grids.
 *
 * Trial t of a grid uses the substream seed ^ t. Within a trial the signal
 * and the missing set depend only on (stream, s). The missing set is a prefix
 * of one permutation, so a larger M always sees a superset of the available
 * samples of a smaller M.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gradrec/csv_io.hpp"
#include "gradrec/errors.hpp"
#include "gradrec/nonuniform.hpp"
#include "gradrec/reconstruct.hpp"
#include "gradrec/signal_gen.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec {

enum class SamplingMode { uniform, nonuniform };

/// Grid runs stop at -120 dB so a converged trial clears the 100 dB recovery
/// threshold with margin; -100 dB lands right on it.
inline ReconConfig grid_recon_defaults() {
  ReconConfig c;
  c.t_max_db = -120.0;
  return c;
}

struct GridSpec {
  std::size_t n = 64;
  std::vector<std::size_t> s_values;
  std::vector<std::size_t> m_values;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::optional<double> noise_snr_db;
  SamplingMode mode = SamplingMode::uniform;
  double full_recovery_threshold_db = 100.0;
  double detection_fraction = 0.5;  ///< detected_sparse when the l1/4 measure < fraction * N
  double dt = 1.0;
  ReconConfig recon = grid_recon_defaults();
  std::size_t jobs = 1;

  void validate() const {
    if (n < 4) throw InputError("grid: N must be at least 4");
    if (s_values.empty() || m_values.empty()) throw InputError("grid: s and M lists must be non-empty");
    for (auto s : s_values) {
      if (s < 2 || s % 2 != 0 || s > n / 2) {
        throw InputError("grid: sparsity " + std::to_string(s) + " must be even and in 2.." + std::to_string(n / 2));
      }
    }
    for (auto m : m_values) {
      if (m < 1 || m >= n) throw InputError("grid: M=" + std::to_string(m) + " must lie in 1.." + std::to_string(n - 1));
    }
    if (trials < 1) throw InputError("grid: trials must be at least 1");
    if (mode == SamplingMode::nonuniform && n % 2 != 0) throw InputError("grid: nonuniform mode needs even N");
    if (jobs < 1) throw InputError("grid: jobs must be at least 1");
    recon.validate();
  }
};

struct TrialRecord {
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t trial = 0;
  double srr_db = std::numeric_limits<double>::quiet_NaN();
  bool full_recovery = false;
  std::size_t iterations = 0;
  double elapsed_seconds = 0.0;
  bool detected_sparse = false;
  bool converged = false;
  std::string error;  ///< set when the trial threw
};

struct CellSummary {
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t count = 0;
  double mean_srr_db = 0.0;  ///< mean of dB values over trials with a finite SRR
  double recovery_pct = 0.0;
  double mean_iterations = 0.0;
  double mean_elapsed_seconds = 0.0;
};

namespace detail {

enum : std::uint64_t { kSignalStream = 1, kMaskStream = 2, kNoiseStream = 3, kJitterStream = 4 };

}  // namespace detail

/// The data one harness trial works on. gen uses the same derivation so a
/// generated file reproduces a grid trial exactly.
struct TrialInstance {
  GroundTruth truth;
  SampleSet samples;
  Signal observed;  ///< truth plus noise when an SNR is given
};

inline TrialInstance make_trial_instance(std::size_t n, std::size_t s, std::size_t m, std::uint64_t seed,
                                         std::size_t trial, std::optional<double> noise_snr_db = std::nullopt) {
  if (s < 2 || s % 2 != 0) throw InputError("sparsity must be even and at least 2, got " + std::to_string(s));
  if (m < 1 || m >= n) throw InputError("M=" + std::to_string(m) + " must lie in 1.." + std::to_string(n - 1));
  const std::uint64_t stream = seed ^ static_cast<std::uint64_t>(trial);
  TrialInstance inst{generate_multitone({n, s / 2, derive_seed(stream, {detail::kSignalStream, s}), 1.0}),
                     random_missing_set(n, n - m, derive_seed(stream, {detail::kMaskStream, s})), {}};
  inst.observed = noise_snr_db
                      ? add_noise(inst.truth.signal, *noise_snr_db, derive_seed(stream, {detail::kNoiseStream, s, m}))
                      : inst.truth.signal;
  return inst;
}

/// Jittered instants for a trial, seeded consistently with make_trial_instance.
inline std::map<std::size_t, NonuniformSample> trial_jittered_samples(const TrialInstance& inst, std::size_t s,
                                                                      std::uint64_t seed, std::size_t trial, double dt) {
  const std::uint64_t stream = seed ^ static_cast<std::uint64_t>(trial);
  return sample_jittered(inst.truth, inst.samples, dt, derive_seed(stream, {detail::kJitterStream, s}));
}

namespace detail {

inline TrialRecord run_trial(const GridSpec& spec, std::size_t s, std::size_t m, std::size_t trial) {
  TrialRecord rec;
  rec.s = s;
  rec.m = m;
  rec.trial = trial;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto inst = make_trial_instance(spec.n, s, m, spec.seed, trial,
                                          spec.mode == SamplingMode::uniform ? spec.noise_snr_db : std::nullopt);
    ReconResult result;
    if (spec.mode == SamplingMode::uniform) {
      result = reconstruct(inst.observed.view(), inst.samples, spec.recon);
    } else {
      auto measured = trial_jittered_samples(inst, s, spec.seed, trial, spec.dt);
      if (spec.noise_snr_db && measured.size() >= 2) {
        std::vector<double> vals;
        for (const auto& [slot, v] : measured) vals.push_back(v.value);
        const std::uint64_t stream = spec.seed ^ static_cast<std::uint64_t>(trial);
        const auto noisy = add_noise(Signal(vals), *spec.noise_snr_db, derive_seed(stream, {kNoiseStream, s, m}));
        std::size_t i = 0;
        for (auto& [slot, v] : measured) v.value = noisy[i++];
      }
      result = reconstruct_nonuniform(measured, spec.n, spec.dt, spec.recon).recon;
    }
    rec.srr_db = srr(inst.truth.signal, result.reconstructed);
    rec.full_recovery = rec.srr_db > spec.full_recovery_threshold_db;
    rec.iterations = result.iterations;
    rec.converged = result.converged;
    rec.detected_sparse =
        measure_lp_quarter(dft(result.reconstructed)) < spec.detection_fraction * static_cast<double>(spec.n);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace detail

/// Runs every (s, M, trial) cell. Records come back in s-major, then M,
/// then trial order regardless of jobs.
inline std::vector<TrialRecord> run_grid(const GridSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t s, m, trial;
  };
  std::vector<Job> jobs;
  for (auto s : spec.s_values)
    for (auto m : spec.m_values)
      for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({s, m, t});

  std::vector<TrialRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      out[i] = detail::run_trial(spec, jobs[i].s, jobs[i].m, jobs[i].trial);
    }
  };
  const std::size_t workers = std::min(spec.jobs, jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return out;
}

/// Per-(s, M) means, in ascending (s, M) order.
inline std::vector<CellSummary> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw InputError("aggregate: no records");
  struct Acc {
    std::size_t count = 0, finite = 0, recovered = 0, iterations = 0;
    double srr = 0.0, elapsed = 0.0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Acc> cells;
  for (const auto& r : records) {
    auto& a = cells[{r.s, r.m}];
    ++a.count;
    if (std::isfinite(r.srr_db)) {
      ++a.finite;
      a.srr += r.srr_db;
    }
    a.recovered += r.full_recovery ? 1 : 0;
    a.iterations += r.iterations;
    a.elapsed += r.elapsed_seconds;
  }
  std::vector<CellSummary> out;
  for (const auto& [key, a] : cells) {
    CellSummary c;
    c.s = key.first;
    c.m = key.second;
    c.count = a.count;
    const auto cnt = static_cast<double>(a.count);
    c.mean_srr_db = a.finite ? a.srr / static_cast<double>(a.finite) : std::numeric_limits<double>::quiet_NaN();
    c.recovery_pct = 100.0 * static_cast<double>(a.recovered) / cnt;
    c.mean_iterations = static_cast<double>(a.iterations) / cnt;
    c.mean_elapsed_seconds = a.elapsed / cnt;
    out.push_back(c);
  }
  return out;
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "s,M,trial,srr_db,full_recovery,iterations,elapsed_s,detected_sparse\n";
  for (const auto& r : records) {
    out << r.s << ',' << r.m << ',' << r.trial << ',' << csv::format_double(r.srr_db) << ','
        << (r.full_recovery ? 1 : 0) << ',' << r.iterations << ',' << csv::format_double(r.elapsed_seconds) << ','
        << (r.detected_sparse ? 1 : 0) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "s,M,mean_srr_db,recovery_pct,mean_iter,mean_elapsed_s\n";
  for (const auto& c : cells) {
    out << c.s << ',' << c.m << ',' << csv::format_double(c.mean_srr_db) << ',' << csv::format_double(c.recovery_pct)
        << ',' << csv::format_double(c.mean_iterations) << ',' << csv::format_double(c.mean_elapsed_seconds) << '\n';
  }
}

}  // namespace gradrec

#endif  // GRADREC_HARNESS_HPP
