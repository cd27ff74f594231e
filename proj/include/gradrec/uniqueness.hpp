#ifndef GRADREC_UNIQUENESS_HPP
#define GRADREC_UNIQUENESS_HPP

/**
 * \file uniqueness.hpp
 * \brief Uniqueness certificate for a sparse reconstruction from the positions
 *        of the missing samples, plus an exhaustive small-N rank oracle.
 *
 * For N = 2^r and h = 0..r-1:
 *   Q_{2^h}     largest number of missing positions sharing one residue mod 2^h
 *   P_h         per-residue counts of the support mod 2^{r-h}, sorted ascending
 *   S_{2^{r-h}} sum of the Q_{2^h} - 1 smallest entries of P_h
 * The reconstruction with support of size s is certified unique when
 *   2s < N - 2^h (Q_{2^h} - 1) + 2 S_{2^{r-h}}   for every h.
 * Setting every S to zero gives the signal-independent (worst case) bound.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gradrec/errors.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec {

struct StrideRow {
  unsigned h = 0;
  std::size_t q_stride = 0;  ///< Q_{2^h}
  std::size_t s_term = 0;    ///< S_{2^{r-h}}
  /// N - 2^h (Q_{2^h} - 1) + 2 S - 2s; the row holds when positive.
  long long margin = 0;
  /// 2^h (Q_{2^h} - 1) - s + 2 S, the term maximized in the inequality as printed.
  long long literal_term = 0;
};

struct UniquenessReport {
  std::size_t n = 0;
  unsigned r = 0;
  std::size_t sparsity = 0;
  std::vector<StrideRow> rows;
  bool unique = false;
  /// Largest s certifiable for any signal (all S set to 0); -1 when none.
  long long worst_case_max_s = -1;
  /// s < N - max_h literal_term, evaluated verbatim for comparison.
  bool literal_unique = false;
};

/// A difference signal that vanishes on the available positions.
struct PerturbationSignal {
  std::vector<double> z;

  static PerturbationSignal on_missing(const SampleSet& samples, const std::vector<double>& missing_values) {
    if (missing_values.size() != samples.missing_count()) {
      throw InputError("perturbation: expected " + std::to_string(samples.missing_count()) + " values");
    }
    PerturbationSignal p;
    p.z.assign(samples.size(), 0.0);
    for (std::size_t i = 0; i < samples.missing().size(); ++i) p.z[samples.missing()[i]] = missing_values[i];
    return p;
  }

  bool vanishes_on(const SampleSet& samples) const {
    return std::all_of(samples.available().begin(), samples.available().end(),
                       [&](std::size_t a) { return z[a] == 0.0; });
  }
};

namespace detail {

inline unsigned log2_checked(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw InputError("uniqueness check needs N = 2^r with r >= 1, got N=" + std::to_string(n));
  }
  return static_cast<unsigned>(std::countr_zero(n));
}

inline void check_h(unsigned h, unsigned r) {
  if (h >= r) throw InputError("stride exponent h=" + std::to_string(h) + " outside 0.." + std::to_string(r - 1));
}

inline void check_support(const std::vector<std::size_t>& support, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (std::size_t k : support) {
    if (k >= n) throw InputError("support index " + std::to_string(k) + " outside 0.." + std::to_string(n - 1));
    if (seen[k]) throw InputError("duplicate support index " + std::to_string(k));
    seen[k] = true;
  }
}

}  // namespace detail

/// Missing positions per residue class b = 0..2^h-1 mod 2^h.
inline std::vector<std::size_t> missing_class_counts(const SampleSet& samples, unsigned h) {
  const unsigned r = detail::log2_checked(samples.size());
  detail::check_h(h, r);
  const std::size_t classes = std::size_t{1} << h;
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t q : samples.missing()) ++counts[q & (classes - 1)];
  return counts;
}

/// Q_{2^h}: the largest count of missing positions in one residue class mod 2^h.
inline std::size_t stride_missing_count(const SampleSet& samples, unsigned h) {
  const auto counts = missing_class_counts(samples, h);
  return *std::max_element(counts.begin(), counts.end());
}

/// Sorted per-residue support counts P_h (residues mod 2^{r-h}).
inline std::vector<std::size_t> support_class_counts(const std::vector<std::size_t>& support, std::size_t n,
                                                     unsigned h) {
  const unsigned r = detail::log2_checked(n);
  detail::check_h(h, r);
  detail::check_support(support, n);
  const std::size_t classes = std::size_t{1} << (r - h);
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t k : support) ++counts[k & (classes - 1)];
  std::sort(counts.begin(), counts.end());
  return counts;
}

/// S_{2^{r-h}}: sum of the Q_{2^h} - 1 smallest support class counts.
inline std::size_t s_term(const std::vector<std::size_t>& support, const SampleSet& samples, unsigned h) {
  const auto p = support_class_counts(support, samples.size(), h);
  const std::size_t q = stride_missing_count(samples, h);
  const std::size_t terms = q == 0 ? 0 : std::min(q - 1, p.size());
  std::size_t s = 0;
  for (std::size_t l = 0; l < terms; ++l) s += p[l];
  return s;
}

inline UniquenessReport check_uniqueness(const std::vector<std::size_t>& support, const SampleSet& samples) {
  const std::size_t n = samples.size();
  const unsigned r = detail::log2_checked(n);
  detail::check_support(support, n);

  UniquenessReport rep;
  rep.n = n;
  rep.r = r;
  rep.sparsity = support.size();
  const auto nn = static_cast<long long>(n);
  const auto s = static_cast<long long>(support.size());

  rep.unique = true;
  long long worst_bound = std::numeric_limits<long long>::max();
  long long literal_max = std::numeric_limits<long long>::min();
  for (unsigned h = 0; h < r; ++h) {
    StrideRow row;
    row.h = h;
    row.q_stride = stride_missing_count(samples, h);
    row.s_term = s_term(support, samples, h);
    const long long stride_loss = (1LL << h) * (static_cast<long long>(row.q_stride) - 1);
    const auto s_extra = 2 * static_cast<long long>(row.s_term);
    row.margin = nn - stride_loss + s_extra - 2 * s;
    row.literal_term = stride_loss - s + s_extra;
    rep.unique = rep.unique && row.margin > 0;
    worst_bound = std::min(worst_bound, nn - stride_loss);
    literal_max = std::max(literal_max, row.literal_term);
    rep.rows.push_back(row);
  }
  // Largest s with 2s < worst_bound.
  rep.worst_case_max_s = worst_bound > 0 ? (worst_bound - 1) / 2 : -1;
  rep.literal_unique = s < nn - literal_max;
  return rep;
}

/// Exhaustive check for small N: the support is unique unless some nonzero
/// spectrum on support + T' (|T'| <= s_max) has an inverse DFT vanishing on
/// every available sample, i.e. the available-row / candidate-column block of
/// the inverse DFT matrix is rank-deficient. Singular values below rank_tol
/// count as zero (matrix entries have unit modulus; the 1/N factor is omitted
/// since it does not change the rank).
inline bool oracle_unique(const std::vector<std::size_t>& support, const SampleSet& samples, std::size_t s_max,
                          double rank_tol = 1e-8) {
  const std::size_t n = samples.size();
  if (n > 16) throw InputError("rank oracle is limited to N <= 16, got N=" + std::to_string(n));
  detail::check_support(support, n);
  if (samples.missing_count() == 0) return true;

  std::uint32_t support_mask = 0;
  for (std::size_t k : support) support_mask |= 1u << k;
  const std::uint32_t full = (1u << n) - 1;
  const std::uint32_t free_mask = full & ~support_mask;
  const std::size_t extra = std::min<std::size_t>(s_max, static_cast<std::size_t>(std::popcount(free_mask)));
  const auto& avail = samples.available();

  // Supersets of a deficient column set are deficient, so only |T'| = extra matters.
  for (std::uint32_t sub = free_mask;; sub = (sub - 1) & free_mask) {
    if (static_cast<std::size_t>(std::popcount(sub)) == extra) {
      const std::uint32_t cols = support_mask | sub;
      const auto ncols = static_cast<std::size_t>(std::popcount(cols));
      if (ncols > 0) {
        if (ncols > avail.size()) return false;
        Eigen::MatrixXcd a(static_cast<Eigen::Index>(avail.size()), static_cast<Eigen::Index>(ncols));
        Eigen::Index c = 0;
        for (std::size_t k = 0; k < n; ++k) {
          if (!(cols & (1u << k))) continue;
          for (std::size_t i = 0; i < avail.size(); ++i) {
            a(static_cast<Eigen::Index>(i), c) = std::polar(
                1.0, 2.0 * std::numbers::pi * static_cast<double>((avail[i] * k) % n) / static_cast<double>(n));
          }
          ++c;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
        if (svd.singularValues().minCoeff() < rank_tol) return false;
      }
    }
    if (sub == 0) break;
  }
  return true;
}

}  // namespace gradrec

#endif  // GRADREC_UNIQUENESS_HPP
