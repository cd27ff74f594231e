#ifndef GRADREC_TESTS_UNIQUENESS_INSTANCES_HPP
#define GRADREC_TESTS_UNIQUENESS_INSTANCES_HPP

// Seeded random (missing set, support) pairs for checking the uniqueness
// certificate against the rank oracle. The draw order is fixed; changing it
// changes every instance.

#include <cstdint>
#include <random>
#include <vector>

#include "gradrec/signal_gen.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec::testing {

struct UniquenessInstance {
  SampleSet samples;
  std::vector<std::size_t> support;
};

inline UniquenessInstance draw_uniqueness_instance(std::size_t n, std::uint64_t seed, std::size_t max_s = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_q(1, n - 1);
  const std::size_t q = pick_q(rng);
  UniquenessInstance inst{random_missing_set(n, q, rng()), {}};
  std::uniform_int_distribution<std::size_t> pick_s(1, max_s);
  const std::size_t s = pick_s(rng);
  std::vector<std::size_t> bins(n);
  for (std::size_t k = 0; k < n; ++k) bins[k] = k;
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> j(i, n - 1);
    std::swap(bins[i], bins[j(rng)]);
  }
  inst.support.assign(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(s));
  return inst;
}

}  // namespace gradrec::testing

#endif  // GRADREC_TESTS_UNIQUENESS_INSTANCES_HPP
