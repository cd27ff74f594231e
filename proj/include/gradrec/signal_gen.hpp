#ifndef GRADREC_SIGNAL_GEN_HPP
#define GRADREC_SIGNAL_GEN_HPP

// Seeded generation of multitone test signals, missing-sample patterns and
// additive noise. Every generator is a pure function of its arguments; the
// engine is std::mt19937_64 seeded through splitmix64.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gradrec/errors.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with a list of integer tags into an independent stream seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(base);
  for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

struct MultitoneSpec {
  std::size_t n = 0;
  std::size_t k = 1;  ///< cosine components; sparsity is 2k
  std::uint64_t seed = 0;
  double amplitude_sigma = 1.0;

  void validate() const {
    if (n < 4) throw InputError("multitone: N must be at least 4, got " + std::to_string(n));
    if (k < 1 || k > n / 4) {
      throw InputError("multitone: K must lie in 1.." + std::to_string(n / 4) + ", got " + std::to_string(k));
    }
    if (!(amplitude_sigma > 0.0) || !std::isfinite(amplitude_sigma)) {
      throw InputError("multitone: amplitude sigma must be positive");
    }
  }
};

struct ToneComponent {
  double amplitude = 0.0;
  std::size_t bin = 0;
  double phase = 0.0;
};

/// A generated signal together with the DFT support it was built on.
struct GroundTruth {
  Signal signal;
  std::vector<std::size_t> support;  ///< sorted; contains k_i and N - k_i
  std::vector<ToneComponent> components;

  std::size_t sparsity() const { return support.size(); }

  /// Continuous-time value x(t) of the band-limited periodic signal with
  /// sampling interval dt. Bins above N/2 are taken at their baseband alias
  /// k - N, which leaves the grid samples unchanged.
  double evaluate(double t, double dt = 1.0) const {
    const auto n = static_cast<double>(signal.size());
    const double period = n * dt;
    double v = 0.0;
    for (const auto& c : components) {
      const double k = static_cast<double>(c.bin);
      const double f = 2.0 * k < n ? k : k - n;
      v += c.amplitude * std::cos(2.0 * std::numbers::pi * f * t / period + c.phase);
    }
    return v;
  }
};

/// x(n) = sum_i A_i cos(2 pi n k_i / N + phi_i) with A_i ~ N(0, sigma^2),
/// distinct non-mirrored bins k_i in 1..N-1 (k_i != N/2) and phi_i ~ U[0, 2 pi).
inline GroundTruth generate_multitone(const MultitoneSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  std::mt19937_64 rng(splitmix64(spec.seed));

  std::vector<std::size_t> candidates;
  for (std::size_t b = 1; b < n; ++b) {
    if (2 * b != n) candidates.push_back(b);
  }

  std::normal_distribution<double> amp(0.0, spec.amplitude_sigma);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  GroundTruth truth;
  for (std::size_t i = 0; i < spec.k; ++i) {
    if (candidates.empty()) {
      throw InputError("multitone: cannot place " + std::to_string(spec.k) + " distinct frequencies in N=" +
                       std::to_string(n));
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t bin = candidates[pick(rng)];
    std::erase_if(candidates, [&](std::size_t b) { return b == bin || b == n - bin; });
    ToneComponent c;
    c.bin = bin;
    c.amplitude = amp(rng);
    c.phase = phase(rng);
    truth.components.push_back(c);
    truth.support.push_back(bin);
    truth.support.push_back(n - bin);
  }
  std::sort(truth.support.begin(), truth.support.end());

  std::vector<double> x(n, 0.0);
  for (const auto& c : truth.components) {
    for (std::size_t t = 0; t < n; ++t) {
      // (t * bin) mod n keeps the phase argument exact for large products.
      const double arg = 2.0 * std::numbers::pi * static_cast<double>((t * c.bin) % n) / static_cast<double>(n);
      x[t] += c.amplitude * std::cos(arg + c.phase);
    }
  }
  truth.signal = Signal(std::move(x));
  return truth;
}

/// Uniformly random set of q missing positions out of n.
inline SampleSet random_missing_set(std::size_t n, std::size_t q, std::uint64_t seed) {
  if (n < 2) throw InputError("missing set: N must be at least 2");
  if (q < 1 || q > n - 1) {
    throw InputError("missing set: Q must lie in 1.." + std::to_string(n - 1) + ", got " + std::to_string(q));
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(splitmix64(seed ^ 0x5a5a5a5aULL));
  // Partial Fisher-Yates: the first q slots become the missing set.
  for (std::size_t i = 0; i < q; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(q);
  return SampleSet::from_missing(n, std::move(idx));
}

/// Adds white Gaussian noise scaled so the realized SNR equals snr_db exactly.
inline Signal add_noise(const Signal& signal, double snr_db, std::uint64_t seed) {
  const double energy = signal.energy();
  if (energy == 0.0) throw InputError("add_noise: signal has zero energy");
  if (!std::isfinite(snr_db)) throw InputError("add_noise: SNR must be finite");
  std::mt19937_64 rng(splitmix64(seed ^ 0xa5a5a5a5ULL));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w(signal.size());
  double w_energy = 0.0;
  do {
    w_energy = 0.0;
    for (auto& v : w) {
      v = gauss(rng);
      w_energy += v * v;
    }
  } while (w_energy == 0.0);
  const double target = energy / std::pow(10.0, snr_db / 10.0);
  const double scale = std::sqrt(target / w_energy);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = signal[i] + scale * w[i];
  return Signal(std::move(out));
}

}  // namespace gradrec

#endif  // GRADREC_SIGNAL_GEN_HPP
