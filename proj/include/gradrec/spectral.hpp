#ifndef GRADREC_SPECTRAL_HPP
#define GRADREC_SPECTRAL_HPP

/**
 * \file spectral.hpp
 * \brief DFT engine, sparsity measures and reconstruction-quality metrics.
 *
 * Convention: the forward transform is unnormalized,
 *   X(k) = sum_n x(n) exp(-j 2 pi n k / N),
 * and the inverse carries the 1/N factor. Every measure and gradient in the
 * library uses this convention.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gradrec/errors.hpp"

namespace gradrec {

using cplx = std::complex<double>;

/// SRR reported when the reconstruction error energy is exactly zero.
inline constexpr double kSrrCapDb = 300.0;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Real time-domain samples x(n), n = 0..N-1.
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw InputError("signal length must be at least 2, got " + std::to_string(values_.size()));
    }
    for (std::size_t n = 0; n < values_.size(); ++n) {
      if (!std::isfinite(values_[n])) {
        throw InputError("signal sample " + std::to_string(n) + " is not finite");
      }
    }
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t n) const { return values_[n]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> view() const { return values_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double energy() const {
    double e = 0.0;
    for (double v : values_) e += v * v;
    return e;
  }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> values_;
};

/// DFT coefficients X(k), k = 0..N-1.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {}

  std::size_t size() const { return coeffs_.size(); }
  const cplx& operator[](std::size_t k) const { return coeffs_[k]; }
  cplx& operator[](std::size_t k) { return coeffs_[k]; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  std::span<const cplx> view() const { return coeffs_; }

 private:
  std::vector<cplx> coeffs_;
};

/// Partition of {0..N-1} into available and missing sample positions.
class SampleSet {
 public:
  SampleSet() = default;

  static SampleSet from_missing(std::size_t n, std::vector<std::size_t> missing) {
    std::vector<bool> mask(n, false);
    for (std::size_t q : missing) {
      if (q >= n) throw InputError("missing index " + std::to_string(q) + " outside 0.." + std::to_string(n - 1));
      if (mask[q]) throw InputError("duplicate missing index " + std::to_string(q));
      mask[q] = true;
    }
    return SampleSet(std::move(mask));
  }

  static SampleSet from_available(std::size_t n, const std::vector<std::size_t>& available) {
    std::vector<bool> mask(n, true);
    std::vector<bool> seen(n, false);
    for (std::size_t a : available) {
      if (a >= n) throw InputError("available index " + std::to_string(a) + " outside 0.." + std::to_string(n - 1));
      if (seen[a]) throw InputError("duplicate available index " + std::to_string(a));
      seen[a] = true;
      mask[a] = false;
    }
    return SampleSet(std::move(mask));
  }

  /// mask[n] == true marks a missing sample.
  explicit SampleSet(std::vector<bool> missing_mask) : missing_mask_(std::move(missing_mask)) {
    if (missing_mask_.size() < 2) throw InputError("sample set length must be at least 2");
    for (std::size_t n = 0; n < missing_mask_.size(); ++n) {
      (missing_mask_[n] ? missing_ : available_).push_back(n);
    }
    if (available_.empty()) throw InputError("sample set needs at least one available sample");
  }

  std::size_t size() const { return missing_mask_.size(); }
  const std::vector<std::size_t>& available() const { return available_; }
  const std::vector<std::size_t>& missing() const { return missing_; }
  bool is_missing(std::size_t n) const { return missing_mask_[n]; }
  std::size_t missing_count() const { return missing_.size(); }
  std::size_t available_count() const { return available_.size(); }

  friend bool operator==(const SampleSet& a, const SampleSet& b) { return a.missing_mask_ == b.missing_mask_; }

 private:
  std::vector<bool> missing_mask_;
  std::vector<std::size_t> available_;
  std::vector<std::size_t> missing_;
};

/// exp(-j 2 pi m / N) for m = 0..N-1.
inline std::vector<cplx> twiddle_table(std::size_t n) {
  std::vector<cplx> w(n);
  for (std::size_t m = 0; m < n; ++m) {
    w[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
  }
  return w;
}

namespace detail {

inline void check_finite(std::span<const cplx> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag())) {
      throw NumericalError("non-finite value at index " + std::to_string(i) + " passed to the DFT");
    }
  }
}

inline void bit_reverse(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
}

}  // namespace detail

/// O(N^2) transform. inverse=true uses exp(+j...) and no scaling.
inline std::vector<cplx> dft_direct(std::span<const cplx> x, bool inverse = false) {
  const std::size_t n = x.size();
  const auto w = twiddle_table(n);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const cplx tw = w[(t * k) % n];
      acc += x[t] * (inverse ? std::conj(tw) : tw);
    }
    out[k] = acc;
  }
  return out;
}

/// Iterative radix-2 transform; N must be a power of two.
inline std::vector<cplx> fft_radix2(std::span<const cplx> x, bool inverse = false) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw InputError("radix-2 FFT needs a power-of-two length, got " + std::to_string(n));
  std::vector<cplx> a(x.begin(), x.end());
  detail::bit_reverse(a);
  const auto w = twiddle_table(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const cplx tw = inverse ? std::conj(w[j * stride]) : w[j * stride];
        const cplx u = a[start + j];
        const cplx v = a[start + j + half] * tw;
        a[start + j] = u + v;
        a[start + j + half] = u - v;
      }
    }
  }
  return a;
}

/// Unnormalized forward DFT of a complex vector (radix-2 when N = 2^r).
inline std::vector<cplx> dft(std::span<const cplx> x) {
  detail::check_finite(x);
  return is_power_of_two(x.size()) ? fft_radix2(x) : dft_direct(x);
}

inline std::vector<cplx> dft(std::span<const double> x) {
  std::vector<cplx> c(x.begin(), x.end());
  return dft(std::span<const cplx>(c));
}

inline Spectrum dft(const Signal& signal) { return Spectrum(dft(signal.view())); }

/// Inverse DFT with the 1/N factor, complex result.
inline std::vector<cplx> idft_complex(std::span<const cplx> coeffs) {
  detail::check_finite(coeffs);
  auto out = is_power_of_two(coeffs.size()) ? fft_radix2(coeffs, true) : dft_direct(coeffs, true);
  const double scale = 1.0 / static_cast<double>(coeffs.size());
  for (auto& v : out) v *= scale;
  return out;
}

/// Drops the imaginary part of a vector that should be real. Residues above
/// rel_tol * max|v| throw.
inline std::vector<double> real_part_checked(std::span<const cplx> v, double rel_tol, const char* what) {
  double max_re = 0.0;
  double max_im = 0.0;
  double max_abs = 0.0;
  for (const auto& c : v) {
    max_re = std::max(max_re, std::abs(c.real()));
    max_im = std::max(max_im, std::abs(c.imag()));
    max_abs = std::max(max_abs, std::abs(c));
  }
  if (max_im > rel_tol * max_abs) {
    std::ostringstream msg;
    msg << what << ": imaginary residue " << max_im << " exceeds tolerance (max real part " << max_re << ")";
    throw NumericalError(msg.str());
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
  return out;
}

/// Inverse DFT to a real signal. A spectrum that is not conjugate-symmetric
/// leaves an imaginary residue; residues above 1e-8 relative are an error.
inline Signal idft(const Spectrum& spectrum) {
  if (spectrum.size() < 2) throw InputError("spectrum length must be at least 2");
  const auto c = idft_complex(spectrum.view());
  return Signal(real_part_checked(c, 1e-8, "idft of a non-conjugate-symmetric spectrum"));
}

inline double measure_l1(std::span<const cplx> coeffs) {
  double s = 0.0;
  for (const auto& c : coeffs) s += std::abs(c);
  return s;
}
inline double measure_l1(const Spectrum& spectrum) { return measure_l1(spectrum.view()); }

/// sum_k |X(k)/N|^(1/4). Close to s for an s-sparse spectrum of unit
/// Fourier-series amplitudes, of order N for a dense one.
inline double measure_lp_quarter(std::span<const cplx> coeffs) {
  const double n = static_cast<double>(coeffs.size());
  double s = 0.0;
  for (const auto& c : coeffs) s += std::pow(std::abs(c) / n, 0.25);
  return s;
}
inline double measure_lp_quarter(const Spectrum& spectrum) { return measure_lp_quarter(spectrum.view()); }

/// Signal-to-reconstruction-error ratio in dB over all samples.
inline double srr(const Signal& original, const Signal& reconstructed) {
  if (original.size() != reconstructed.size()) {
    throw InputError("srr: length mismatch " + std::to_string(original.size()) + " vs " +
                     std::to_string(reconstructed.size()));
  }
  const double signal_energy = original.energy();
  if (signal_energy == 0.0) throw InputError("srr: original signal has zero energy");
  double err = 0.0;
  for (std::size_t n = 0; n < original.size(); ++n) {
    const double d = original[n] - reconstructed[n];
    err += d * d;
  }
  if (err == 0.0) return kSrrCapDb;
  return 10.0 * std::log10(signal_energy / err);
}

}  // namespace gradrec

#endif  // GRADREC_SPECTRAL_HPP
