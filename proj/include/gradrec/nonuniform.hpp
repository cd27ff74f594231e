#ifndef GRADREC_NONUNIFORM_HPP
#define GRADREC_NONUNIFORM_HPP

/**
 * \file nonuniform.hpp
 * \brief Reconstruction from a random subset of nonuniformly positioned samples.
 *
 * A periodic signal band-limited to N bins is fully determined by its N
 * uniform samples x(n dt). Its value at any instant t follows from the
 * periodic (Dirichlet) interpolant
 *
 *   x(t) = sum_n x(n dt) exp(j v pi / N) sin(v pi) / (N sin(v pi / N)),  v = n - t/dt,
 *
 * valid for even N. Stacking one row per sampling instant gives x_hat = B x,
 * so values measured at jittered instants map back to the uniform grid
 * through B^{-1}. Unmeasured slots are placed on the uniform grid and become
 * the reconstruction variables; the gradient engine then runs on
 * spectrum(DFT(B^{-1} y_hat)) with B^{-1} factored once per grid.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradrec/errors.hpp"
#include "gradrec/reconstruct.hpp"
#include "gradrec/signal_gen.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec {

/// Sampling instants t_i, one per slot i = 0..N-1. Measured slots may be
/// jittered by at most dt/2; unmeasured slots sit exactly on i * dt.
struct NonuniformGrid {
  std::size_t n = 0;
  double dt = 1.0;
  std::vector<double> instants;
  std::vector<bool> measured;

  double period() const { return static_cast<double>(n) * dt; }
  double omega_max() const { return std::numbers::pi / dt; }

  void validate() const {
    if (n < 2 || n % 2 != 0) throw InputError("nonuniform grid needs an even N >= 2, got N=" + std::to_string(n));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("sampling interval dt must be positive");
    if (instants.size() != n || measured.size() != n) throw InputError("grid arrays must have N entries");
    for (std::size_t i = 0; i < n; ++i) {
      const double nominal = static_cast<double>(i) * dt;
      if (!std::isfinite(instants[i])) throw InputError("instant " + std::to_string(i) + " is not finite");
      if (measured[i]) {
        if (std::abs(instants[i] - nominal) > 0.5 * dt * (1.0 + 1e-12)) {
          throw InputError("instant t_" + std::to_string(i) + "=" + std::to_string(instants[i]) +
                           " deviates from the grid by more than dt/2");
        }
      } else if (instants[i] != nominal) {
        throw InputError("unmeasured slot " + std::to_string(i) + " must sit at i*dt");
      }
      if (i > 0 && !(instants[i] > instants[i - 1])) {
        throw InputError("instants must be strictly increasing (slots " + std::to_string(i - 1) + ", " +
                         std::to_string(i) + ")");
      }
    }
  }

  SampleSet sample_set() const {
    std::vector<bool> missing(n);
    for (std::size_t i = 0; i < n; ++i) missing[i] = !measured[i];
    return SampleSet(std::move(missing));
  }

  /// Grid with measured instants at the given slots and i*dt elsewhere.
  static NonuniformGrid mixed(std::size_t n, double dt, const std::map<std::size_t, double>& measured_instants) {
    NonuniformGrid g;
    g.n = n;
    g.dt = dt;
    g.instants.resize(n);
    g.measured.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) g.instants[i] = static_cast<double>(i) * dt;
    for (const auto& [slot, t] : measured_instants) {
      if (slot >= n) throw InputError("slot " + std::to_string(slot) + " outside 0.." + std::to_string(n - 1));
      g.instants[slot] = t;
      g.measured[slot] = true;
    }
    g.validate();
    return g;
  }
};

/// Interpolation kernel for offset v = n - t/dt. Integer offsets use the limit.
inline cplx dirichlet_kernel(double v, std::size_t n) {
  const double nd = static_cast<double>(n);
  const double nearest = std::round(v);
  if (std::abs(v - nearest) < 1e-12) {
    const auto m = static_cast<long long>(nearest);
    return (m % static_cast<long long>(n) == 0) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
  }
  const double ratio = std::sin(v * std::numbers::pi) / (nd * std::sin(v * std::numbers::pi / nd));
  return std::polar(ratio, v * std::numbers::pi / nd);
}

/// Complex value of the periodic band-limited interpolant at instant t.
inline cplx eval_interpolant_complex(std::span<const double> uniform, double t, double dt) {
  const std::size_t n = uniform.size();
  if (n < 2 || n % 2 != 0) throw InputError("interpolation needs an even N, got N=" + std::to_string(n));
  if (!(dt > 0.0)) throw InputError("sampling interval dt must be positive");
  cplx acc{0.0, 0.0};
  const double u = t / dt;
  for (std::size_t j = 0; j < n; ++j) acc += uniform[j] * dirichlet_kernel(static_cast<double>(j) - u, n);
  return acc;
}

/// Real value of the interpolant; an imaginary residue above 1e-9 relative
/// (a nonzero Nyquist component sampled off-grid) is an error.
inline double eval_interpolant(const Signal& uniform, double t, double dt) {
  const cplx v = eval_interpolant_complex(uniform.view(), t, dt);
  const double scale = std::max(uniform.max_abs(), std::abs(v));
  if (std::abs(v.imag()) > 1e-9 * scale) {
    throw NumericalError("interpolant at t=" + std::to_string(t) + " has imaginary residue " +
                         std::to_string(v.imag()) + "; the signal has a Nyquist-bin component");
  }
  return v.real();
}

class InterpolationOperator {
 public:
  static constexpr double kMaxCondition = 1e12;

  explicit InterpolationOperator(const NonuniformGrid& grid) : grid_(grid) {
    grid_.validate();
    const auto n = static_cast<Eigen::Index>(grid_.n);
    b_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = grid_.instants[static_cast<std::size_t>(i)] / grid_.dt;
      for (Eigen::Index j = 0; j < n; ++j) b_(i, j) = dirichlet_kernel(static_cast<double>(j) - u, grid_.n);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b_);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    condition_ = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kMaxCondition)) {
      throw NumericalError("interpolation matrix condition estimate " + std::to_string(condition_) +
                           " exceeds 1e12; sampling instants are nearly coincident");
    }
    lu_.compute(b_);
    b_inv_ = lu_.inverse();
  }

  const NonuniformGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.n; }
  const Eigen::MatrixXcd& matrix() const { return b_; }
  const Eigen::MatrixXcd& inverse() const { return b_inv_; }
  double condition_estimate() const { return condition_; }

  /// B^{-1} v, by the cached inverse.
  std::vector<cplx> apply_inverse(std::span<const double> v) const {
    check_length(v.size());
    std::vector<cplx> out(grid_.n, cplx{0.0, 0.0});
    for (std::size_t j = 0; j < grid_.n; ++j) {
      const double vj = v[j];
      if (vj == 0.0) continue;
      for (std::size_t i = 0; i < grid_.n; ++i) {
        out[i] += b_inv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * vj;
      }
    }
    return out;
  }

  /// Solves B x = v through the LU factors.
  std::vector<cplx> solve(std::span<const double> v) const {
    check_length(v.size());
    Eigen::VectorXcd rhs(static_cast<Eigen::Index>(grid_.n));
    for (std::size_t i = 0; i < grid_.n; ++i) rhs(static_cast<Eigen::Index>(i)) = v[i];
    const Eigen::VectorXcd x = lu_.solve(rhs);
    return {x.data(), x.data() + x.size()};
  }

 private:
  void check_length(std::size_t len) const {
    if (len != grid_.n) {
      throw InputError("vector of length " + std::to_string(len) + " for an operator of size " +
                       std::to_string(grid_.n));
    }
  }

  NonuniformGrid grid_;
  Eigen::MatrixXcd b_;
  Eigen::MatrixXcd b_inv_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double condition_ = 0.0;
};

inline InterpolationOperator build_operator(const NonuniformGrid& grid) { return InterpolationOperator(grid); }

/// Uniform-grid samples from values at the grid instants.
inline Signal recalc_to_uniform(std::span<const double> values_at_instants, const InterpolationOperator& op) {
  const auto u = op.apply_inverse(values_at_instants);
  return Signal(real_part_checked(u, 1e-8, "recalculation to the uniform grid"));
}

/// Spectral model for the engine: spectrum(y) = DFT(B^{-1} y). The spectrum
/// of a unit perturbation at slot i is the DFT of column i of B^{-1}.
class NonuniformModel {
 public:
  NonuniformModel(const InterpolationOperator& op, const SampleSet& samples)
      : op_(&op), n_(op.size()), row_(op.size(), kNone), directions_(samples.missing_count() * op.size()) {
    if (samples.size() != n_) throw InputError("sample set does not match the interpolation operator");
    const auto w = twiddle_table(n_);
    const auto& inv = op.inverse();
    std::size_t r = 0;
    for (std::size_t q : samples.missing()) {
      row_[q] = r;
      cplx* d = directions_.data() + r * n_;
      for (std::size_t k = 0; k < n_; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < n_; ++j) {
          acc += inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) * w[(j * k) % n_];
        }
        d[k] = acc;
      }
      ++r;
    }
  }

  std::size_t size() const { return n_; }
  std::vector<cplx> spectrum(std::span<const double> y) const {
    const auto u = op_->apply_inverse(y);
    return dft(std::span<const cplx>(u));
  }
  std::span<const cplx> direction(std::size_t slot) const {
    if (slot >= n_ || row_[slot] == kNone) throw InputError("no perturbation direction for slot " + std::to_string(slot));
    return {directions_.data() + row_[slot] * n_, n_};
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const InterpolationOperator* op_;
  std::size_t n_;
  std::vector<std::size_t> row_;
  std::vector<cplx> directions_;
};

/// Finite-difference gradient with two LU solves per missing slot.
inline GradientVector nonuniform_gradient_reference(const InterpolationOperator& op, std::span<const double> y,
                                                    const SampleSet& samples, double delta) {
  const std::size_t n = op.size();
  GradientVector g(n, 0.0);
  std::vector<double> probe(y.begin(), y.end());
  for (std::size_t q : samples.missing()) {
    probe[q] = y[q] + delta;
    auto up = op.solve(probe);
    const double plus = measure_l1(dft(std::span<const cplx>(up)));
    probe[q] = y[q] - delta;
    auto down = op.solve(probe);
    const double minus = measure_l1(dft(std::span<const cplx>(down)));
    probe[q] = y[q];
    g[q] = (plus - minus) / static_cast<double>(n);
  }
  return g;
}

struct NonuniformSample {
  double t = 0.0;
  double value = 0.0;
};

struct NonuniformResult {
  ReconResult recon;                   ///< reconstructed holds the uniform-grid signal (real part)
  std::vector<double> instant_values;  ///< final values at the grid instants
  double imag_residue = 0.0;           ///< max |Im| of B^{-1} y at the end
  double condition_estimate = 0.0;
};

/// Reconstructs the uniform-grid signal from measured (t_i, x(t_i)) pairs
/// keyed by slot. Unmeasured slots are placed at i*dt and start at zero.
inline NonuniformResult reconstruct_nonuniform(const std::map<std::size_t, NonuniformSample>& available,
                                               std::size_t n, double dt, const ReconConfig& config = {}) {
  config.validate();
  if (available.empty()) throw InputError("nonuniform reconstruction needs at least one measured sample");
  std::map<std::size_t, double> instants;
  std::vector<double> y(n, 0.0);
  for (const auto& [slot, s] : available) {
    if (slot >= n) throw InputError("slot " + std::to_string(slot) + " outside 0.." + std::to_string(n - 1));
    if (!std::isfinite(s.value)) throw InputError("value at slot " + std::to_string(slot) + " is not finite");
    instants[slot] = s.t;
    y[slot] = s.value;
  }
  const auto grid = NonuniformGrid::mixed(n, dt, instants);
  const InterpolationOperator op(grid);
  const SampleSet samples = grid.sample_set();
  const auto init = initialize(std::span<const double>(y), samples, config.delta_init);

  NonuniformResult out;
  out.condition_estimate = op.condition_estimate();
  if (samples.missing_count() == 0) {
    out.recon.converged = true;
    out.instant_values = y;
  } else {
    const NonuniformModel model(op, samples);
    out.recon = run_reconstruction(model, init.y0.values(), samples, init.delta0, config);
    out.instant_values = out.recon.reconstructed.values();
  }
  const auto u = op.apply_inverse(out.instant_values);
  std::vector<double> re(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = u[i].real();
    out.imag_residue = std::max(out.imag_residue, std::abs(u[i].imag()));
  }
  out.recon.reconstructed = Signal(std::move(re));
  return out;
}

/// Jittered measurements of a ground-truth signal at the available slots:
/// t_i = i dt + nu_i with nu_i ~ U[-dt/2, dt/2).
inline std::map<std::size_t, NonuniformSample> sample_jittered(const GroundTruth& truth, const SampleSet& samples,
                                                               double dt, std::uint64_t seed, double jitter = 1.0) {
  if (!(dt > 0.0)) throw InputError("sampling interval dt must be positive");
  if (jitter < 0.0 || jitter > 1.0) throw InputError("jitter fraction must lie in [0, 1]");
  std::mt19937_64 rng(splitmix64(seed ^ 0x3c3c3c3cULL));
  std::uniform_real_distribution<double> nu(-0.5 * dt, 0.5 * dt);
  std::map<std::size_t, NonuniformSample> out;
  for (std::size_t a : samples.available()) {
    const double t = static_cast<double>(a) * dt + jitter * nu(rng);
    out[a] = {t, truth.evaluate(t, dt)};
  }
  return out;
}

}  // namespace gradrec

#endif  // GRADREC_NONUNIFORM_HPP
