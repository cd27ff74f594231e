#ifndef GRADREC_RECONSTRUCT_HPP
#define GRADREC_RECONSTRUCT_HPP

/**
 * \file reconstruct.hpp
 * \brief Adaptive-step gradient reconstruction of missing samples.
 *
 * The missing samples are the minimization variables of the l1 spectral
 * measure sum_k |X(k)|; available samples stay fixed. Each inner iteration
 * estimates the gradient by finite differences of +-delta at every missing
 * position and applies all updates simultaneously. The inner loop ends when
 * two successive gradients point in nearly opposite directions (angle at or
 * above the threshold); the step is then divided by step_divisor and the
 * relative change T_r of the missing samples over that inner loop is checked
 * against the stopping threshold.
 *
 * The engine is generic over a spectral model, which maps the variable vector
 * to the spectrum being measured and supplies the spectrum of a unit
 * perturbation at each missing slot. UniformModel is the plain DFT case; the
 * nonuniform module provides a model that goes through the inverse
 * interpolation matrix first.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradrec/errors.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec {

struct ReconConfig {
  std::optional<double> delta_init;  ///< defaults to max |y0(n)|
  double angle_threshold_deg = 170.0;
  double step_divisor = std::sqrt(10.0);
  double t_max_db = -100.0;
  std::optional<double> target_precision_db;  ///< overrides t_max_db when set
  std::size_t inner_iter_cap = 2000;
  std::size_t outer_iter_cap = 50;

  double stop_threshold_db() const { return target_precision_db.value_or(t_max_db); }

  void validate() const {
    if (!(angle_threshold_deg > 0.0 && angle_threshold_deg < 180.0)) {
      throw InputError("angle threshold must lie strictly between 0 and 180 degrees");
    }
    if (!(step_divisor > 1.0) || !std::isfinite(step_divisor)) throw InputError("step divisor must exceed 1");
    if (inner_iter_cap < 1 || outer_iter_cap < 1) throw InputError("iteration caps must be at least 1");
    if (delta_init && !(*delta_init > 0.0 && std::isfinite(*delta_init))) {
      throw InputError("initial step must be positive and finite");
    }
    if (!std::isfinite(stop_threshold_db())) throw InputError("stopping threshold must be finite");
  }
};

/// One inner iteration.
struct IterationRecord {
  std::size_t m = 0;       ///< global iteration counter, starting at 1
  double delta = 0.0;      ///< step used in this iteration
  double beta_deg = std::numeric_limits<double>::quiet_NaN();  ///< NaN on the first iteration of a step
  double measure = 0.0;    ///< l1 measure of the spectrum the gradient was taken at
  double tr_db = std::numeric_limits<double>::quiet_NaN();     ///< set on the iteration closing an outer loop
  double max_update = 0.0; ///< max_n |g(n)|
};

/// One outer loop (one value of delta).
struct OuterRecord {
  double delta = 0.0;
  std::size_t inner_iterations = 0;
  bool angle_triggered = false;  ///< false when the inner cap ended the loop
  double tr_db = 0.0;
  double measure_end = 0.0;      ///< l1 measure after the last update of the loop
};

struct ReconResult {
  Signal reconstructed;
  std::size_t iterations = 0;
  std::vector<IterationRecord> trace;
  std::vector<OuterRecord> outer;
  bool converged = false;
};

using GradientVector = std::vector<double>;

/// Spectral model consumed by the engine.
template <class M>
concept SpectralModel = requires(const M& model, std::span<const double> y, std::size_t slot) {
  { model.size() } -> std::convertible_to<std::size_t>;
  { model.spectrum(y) } -> std::convertible_to<std::vector<cplx>>;
  { model.direction(slot) } -> std::convertible_to<std::span<const cplx>>;
};

/// Plain DFT model: D_n(k) = exp(-j 2 pi n k / N), tabulated once per missing slot.
class UniformModel {
 public:
  explicit UniformModel(const SampleSet& samples)
      : n_(samples.size()), row_(samples.size(), kNone), directions_(samples.missing_count() * samples.size()) {
    const auto w = twiddle_table(n_);
    std::size_t r = 0;
    for (std::size_t q : samples.missing()) {
      row_[q] = r;
      cplx* d = directions_.data() + r * n_;
      for (std::size_t k = 0; k < n_; ++k) d[k] = w[(q * k) % n_];
      ++r;
    }
  }

  std::size_t size() const { return n_; }
  std::vector<cplx> spectrum(std::span<const double> y) const { return dft(y); }
  std::span<const cplx> direction(std::size_t slot) const {
    if (slot >= n_ || row_[slot] == kNone) throw InputError("no perturbation direction for slot " + std::to_string(slot));
    return {directions_.data() + row_[slot] * n_, n_};
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t n_;
  std::vector<std::size_t> row_;
  std::vector<cplx> directions_;
};

namespace detail {

/// |y + step| - |y - step| for complex y and step.
inline double bin_difference(const cplx& y, const cplx& step) {
  const double yr = y.real();
  const double yi = y.imag();
  const double dr = step.real();
  const double di = step.imag();
  return std::sqrt((yr + dr) * (yr + dr) + (yi + di) * (yi + di)) -
         std::sqrt((yr - dr) * (yr - dr) + (yi - di) * (yi - di));
}

}  // namespace detail

/// |Y(k) + delta D(k)| - |Y(k) - delta D(k)| for every bin.
inline std::vector<double> bin_differences(std::span<const cplx> spectrum, std::span<const cplx> direction,
                                           double delta) {
  std::vector<double> out(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) out[k] = detail::bin_difference(spectrum[k], delta * direction[k]);
  return out;
}

/// Gradient estimate from a precomputed spectrum Y of the current variables
/// (incremental path). Zero at available positions.
template <SpectralModel Model>
GradientVector gradient(const Model& model, std::span<const cplx> spectrum, const SampleSet& samples, double delta) {
  const std::size_t n = model.size();
  GradientVector g(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t q : samples.missing()) {
    const auto d = model.direction(q);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += detail::bin_difference(spectrum[k], delta * d[k]);
    g[q] = acc * inv_n;
  }
  return g;
}

/// Gradient via two full transforms per missing slot. Kept for testing.
template <SpectralModel Model>
GradientVector gradient_reference(const Model& model, std::span<const double> y, const SampleSet& samples,
                                  double delta) {
  const std::size_t n = model.size();
  GradientVector g(n, 0.0);
  std::vector<double> probe(y.begin(), y.end());
  for (std::size_t q : samples.missing()) {
    probe[q] = y[q] + delta;
    const double plus = measure_l1(model.spectrum(probe));
    probe[q] = y[q] - delta;
    const double minus = measure_l1(model.spectrum(probe));
    probe[q] = y[q];
    g[q] = (plus - minus) / static_cast<double>(n);
  }
  return g;
}

inline GradientVector gradient(const Signal& y, const SampleSet& samples, double delta) {
  if (y.size() != samples.size()) throw InputError("gradient: signal and sample set lengths differ");
  if (!(delta > 0.0)) throw InputError("gradient: step must be positive");
  const UniformModel model(samples);
  const auto spectrum = model.spectrum(y.view());
  return gradient(model, std::span<const cplx>(spectrum), samples, delta);
}

inline GradientVector gradient_reference(const Signal& y, const SampleSet& samples, double delta) {
  if (y.size() != samples.size()) throw InputError("gradient: signal and sample set lengths differ");
  if (!(delta > 0.0)) throw InputError("gradient: step must be positive");
  return gradient_reference(UniformModel(samples), y.view(), samples, delta);
}

/// Angle in degrees between two gradient vectors; 180 when either is (near) zero.
inline double gradient_angle(std::span<const double> prev, std::span<const double> curr) {
  if (prev.size() != curr.size()) throw InputError("gradient_angle: length mismatch");
  double dot = 0.0;
  double np = 0.0;
  double nc = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    dot += prev[i] * curr[i];
    np += prev[i] * prev[i];
    nc += curr[i] * curr[i];
  }
  np = std::sqrt(np);
  nc = std::sqrt(nc);
  if (np < 1e-300 || nc < 1e-300) return 180.0;
  const double c = std::clamp(dot / (np * nc), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

/// Starting point: available values in place, zeros at missing positions.
struct InitialState {
  Signal y0;
  double delta0 = 0.0;
};

/// `values` has length N; entries at missing positions are ignored.
inline InitialState initialize(std::span<const double> values, const SampleSet& samples,
                               std::optional<double> delta_override = std::nullopt) {
  if (values.size() != samples.size()) {
    throw InputError("initialize: " + std::to_string(values.size()) + " values for a sample set of length " +
                     std::to_string(samples.size()));
  }
  std::vector<double> y(values.size(), 0.0);
  double peak = 0.0;
  for (std::size_t a : samples.available()) {
    if (!std::isfinite(values[a])) throw InputError("available sample " + std::to_string(a) + " is not finite");
    y[a] = values[a];
    peak = std::max(peak, std::abs(values[a]));
  }
  if (peak == 0.0) throw InputError("all available samples are zero; the initial step would be zero");
  InitialState s{Signal(std::move(y)), peak};
  if (delta_override) s.delta0 = *delta_override;
  return s;
}

inline InitialState initialize(const std::map<std::size_t, double>& available, const SampleSet& samples,
                               std::optional<double> delta_override = std::nullopt) {
  std::vector<double> dense(samples.size(), 0.0);
  if (available.size() != samples.available_count()) {
    throw InputError("initialize: " + std::to_string(available.size()) + " values given for " +
                     std::to_string(samples.available_count()) + " available positions");
  }
  for (const auto& [n, v] : available) {
    if (n >= samples.size() || samples.is_missing(n)) {
      throw InputError("initialize: index " + std::to_string(n) + " is not an available position");
    }
    dense[n] = v;
  }
  return initialize(std::span<const double>(dense), samples, delta_override);
}

/// 10 log10 of the change over missing positions relative to their energy.
inline double change_ratio_db(std::span<const double> before, std::span<const double> after,
                              const SampleSet& samples) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t q : samples.missing()) {
    const double d = before[q] - after[q];
    num += d * d;
    den += after[q] * after[q];
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

/// Runs the double loop from a given starting vector. Positions outside the
/// missing set are never written.
template <SpectralModel Model>
ReconResult run_reconstruction(const Model& model, std::vector<double> y, const SampleSet& samples, double delta,
                               const ReconConfig& config) {
  config.validate();
  if (y.size() != model.size() || samples.size() != model.size()) {
    throw InputError("reconstruction: model, variables and sample set lengths differ");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("reconstruction: initial step must be positive");

  ReconResult result;
  if (samples.missing_count() == 0) {
    result.reconstructed = Signal(std::move(y));
    result.converged = true;
    return result;
  }

  const double threshold_db = config.stop_threshold_db();
  std::size_t m = 0;
  for (std::size_t outer = 0; outer < config.outer_iter_cap; ++outer) {
    const std::vector<double> y_prior = y;
    GradientVector g_prev;
    OuterRecord loop;
    loop.delta = delta;

    while (true) {
      ++m;
      ++loop.inner_iterations;
      const auto spectrum = model.spectrum(y);
      IterationRecord rec;
      rec.m = m;
      rec.delta = delta;
      rec.measure = measure_l1(spectrum);

      auto g = gradient(model, std::span<const cplx>(spectrum), samples, delta);
      for (std::size_t q : samples.missing()) {
        if (!std::isfinite(g[q])) {
          throw NumericalError("reconstruction diverged: non-finite gradient at n=" + std::to_string(q) +
                               ", iteration " + std::to_string(m));
        }
        rec.max_update = std::max(rec.max_update, std::abs(g[q]));
        y[q] -= g[q];
      }
      if (!g_prev.empty()) rec.beta_deg = gradient_angle(g_prev, g);
      result.trace.push_back(rec);
      g_prev = std::move(g);

      if (rec.beta_deg >= config.angle_threshold_deg) {
        loop.angle_triggered = true;
        break;
      }
      if (loop.inner_iterations >= config.inner_iter_cap) break;
    }

    delta /= config.step_divisor;
    loop.tr_db = change_ratio_db(y_prior, y, samples);
    loop.measure_end = measure_l1(model.spectrum(y));
    result.trace.back().tr_db = loop.tr_db;
    result.outer.push_back(loop);
    if (loop.tr_db < threshold_db) {
      result.converged = true;
      break;
    }
  }

  result.iterations = m;
  result.reconstructed = Signal(std::move(y));
  return result;
}

/// Reconstructs the missing samples of a uniformly sampled signal.
/// `values` has length N; entries at missing positions are ignored.
inline ReconResult reconstruct(std::span<const double> values, const SampleSet& samples,
                               const ReconConfig& config = {}) {
  config.validate();
  if (samples.missing_count() == 0) {
    ReconResult r;
    r.reconstructed = Signal(std::vector<double>(values.begin(), values.end()));
    r.converged = true;
    return r;
  }
  auto init = initialize(values, samples, config.delta_init);
  const UniformModel model(samples);
  return run_reconstruction(model, init.y0.values(), samples, init.delta0, config);
}

inline ReconResult reconstruct(const std::map<std::size_t, double>& available, const SampleSet& samples,
                               const ReconConfig& config = {}) {
  auto init = initialize(available, samples, config.delta_init);
  return reconstruct(init.y0.view(), samples, config);
}

}  // namespace gradrec

#endif  // GRADREC_RECONSTRUCT_HPP
