#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "gradrec/spectral.hpp"

using namespace gradrec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Textbook sum evaluated in long double, independent of the twiddle table.
std::vector<cplx> naive_dft(const std::vector<double>& x) {
  const auto n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(t * k) / n;
      re += x[t] * std::cos(a);
      im += x[t] * std::sin(a);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

}  // namespace

TEST_CASE("dft of a unit impulse is flat") {
  std::vector<double> x(8, 0.0);
  x[0] = 1.0;
  const auto X = dft(Signal(x));
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK_THAT(X[k].real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(X[k].imag(), WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("dft of a single tone has two bins of height N/2") {
  std::vector<double> x(16);
  for (std::size_t n = 0; n < 16; ++n) x[n] = std::cos(2.0 * std::numbers::pi * static_cast<double>(n) * 3.0 / 16.0);
  const auto X = dft(Signal(x));
  for (std::size_t k = 0; k < 16; ++k) {
    const double want = (k == 3 || k == 13) ? 8.0 : 0.0;
    CHECK_THAT(std::abs(X[k] - cplx(want, 0.0)), WithinAbs(0.0, 1e-9));
  }
  CHECK_THAT(measure_l1(X), WithinAbs(16.0, 1e-9));
}

TEST_CASE("direct and radix-2 paths agree with a long double reference") {
  for (std::size_t n : {2u, 8u, 12u, 64u, 128u, 100u}) {
    const auto x = random_real(n, n);
    const auto ref = naive_dft(x);
    std::vector<cplx> xc(x.begin(), x.end());
    const auto direct = dft_direct(xc);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(direct[k] - ref[k]) < 1e-11 * static_cast<double>(n));
    if (is_power_of_two(n)) {
      const auto fast = fft_radix2(xc);
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(fast[k] - ref[k]) < 1e-11 * static_cast<double>(n));
    }
  }
}

TEST_CASE("idft inverts the impulse and tone examples") {
  const auto delta = idft(Spectrum(std::vector<cplx>(8, cplx(1.0, 0.0))));
  for (std::size_t n = 0; n < 8; ++n) CHECK_THAT(delta[n], WithinAbs(n == 0 ? 1.0 : 0.0, 1e-15));

  std::vector<cplx> c(16, 0.0);
  c[3] = c[13] = 8.0;
  const auto tone = idft(Spectrum(c));
  for (std::size_t n = 0; n < 16; ++n) {
    CHECK_THAT(tone[n], WithinAbs(std::cos(2.0 * std::numbers::pi * static_cast<double>(n) * 3.0 / 16.0), 1e-12));
  }
}

TEST_CASE("idft rejects a spectrum that is not conjugate symmetric") {
  std::vector<cplx> c(8, 0.0);
  c[1] = 1.0;
  CHECK_THROWS_AS(idft(Spectrum(c)), NumericalError);
}

TEST_CASE("roundtrip, Parseval and conjugate symmetry on random signals") {
  for (std::size_t n : {8u, 64u, 128u, 30u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Signal x(random_real(n, 100 * n + seed));
      const auto X = dft(x);
      const auto back = idft(X);
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - x[i]));
      CHECK(err <= 1e-10 * static_cast<double>(n) * x.max_abs());
      if (n == 64) CHECK(err <= 1e-10);

      double spec_energy = 0.0;
      for (std::size_t k = 0; k < n; ++k) spec_energy += std::norm(X[k]);
      CHECK_THAT(spec_energy / static_cast<double>(n), WithinRel(x.energy(), 1e-8));

      double scale = 0.0;
      for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, std::abs(X[k]));
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(X[k] - std::conj(X[(n - k) % n])) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("measure_l1") {
  CHECK(measure_l1(Spectrum(std::vector<cplx>(16, 0.0))) == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<cplx> c(50);
  for (auto& v : c) v = {g(rng), g(rng)};
  double manual = 0.0;
  for (const auto& v : c) manual += std::hypot(v.real(), v.imag());
  CHECK_THAT(measure_l1(c), WithinRel(manual, 1e-14));

  for (double a : {-3.5, 0.0, 2.0, 1e6}) {
    std::vector<cplx> scaled(c);
    for (auto& v : scaled) v *= a;
    CHECK_THAT(measure_l1(scaled), WithinAbs(std::abs(a) * manual, 1e-12 * std::max(1.0, std::abs(a) * manual)));
  }
  std::vector<cplx> rotated(c);
  for (auto& v : rotated) v *= cplx(0.0, -2.0);
  CHECK_THAT(measure_l1(rotated), WithinRel(2.0 * manual, 1e-13));
}

TEST_CASE("measure_lp_quarter") {
  CHECK(measure_lp_quarter(Spectrum(std::vector<cplx>(128, 0.0))) == 0.0);

  std::vector<cplx> sparse(128, 0.0);
  for (std::size_t k : {5u, 17u, 40u, 88u, 111u, 123u}) sparse[k] = std::polar(128.0, 0.1 * static_cast<double>(k));
  CHECK_THAT(measure_lp_quarter(sparse), WithinAbs(6.0, 1e-12));

  // Dense: X(k)/N i.i.d. complex standard normal, 100 draws.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  for (int draw = 0; draw < 100; ++draw) {
    std::vector<cplx> c(128);
    for (auto& v : c) v = 128.0 * cplx(g(rng), g(rng));
    const double m = measure_lp_quarter(c);
    CHECK(m >= 0.5 * 128);
    CHECK(m <= 1.5 * 128);
  }
}

TEST_CASE("srr examples") {
  const Signal x(random_real(32, 9));
  CHECK(srr(x, x) == kSrrCapDb);
  CHECK_THAT(srr(x, Signal(std::vector<double>(32, 0.0))), WithinAbs(0.0, 1e-12));
  std::vector<double> y(x.values());
  for (auto& v : y) v += 1e-5 * v;
  CHECK_THAT(srr(x, Signal(y)), WithinAbs(100.0, 1e-6));
}

TEST_CASE("srr errors") {
  const Signal zero(std::vector<double>(8, 0.0));
  const Signal one(std::vector<double>(8, 1.0));
  CHECK_THROWS_AS(srr(zero, one), InputError);
  CHECK_THROWS_AS(srr(one, Signal(std::vector<double>(4, 1.0))), InputError);
}

TEST_CASE("Signal validates length and finiteness") {
  CHECK_THROWS_AS(Signal(std::vector<double>{1.0}), InputError);
  CHECK_THROWS_AS(Signal(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), InputError);
  CHECK_THROWS_AS(Signal(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), InputError);
  std::vector<cplx> bad(4, 0.0);
  bad[2] = {std::numeric_limits<double>::infinity(), 0.0};
  CHECK_THROWS_AS(dft(std::span<const cplx>(bad)), NumericalError);
}

TEST_CASE("SampleSet partitions the index range") {
  const auto s = SampleSet::from_missing(10, {7, 2, 5});
  CHECK(s.missing() == std::vector<std::size_t>{2, 5, 7});
  CHECK(s.available() == std::vector<std::size_t>{0, 1, 3, 4, 6, 8, 9});
  CHECK(s.missing_count() + s.available_count() == 10);
  CHECK(SampleSet::from_available(10, s.available()) == s);
  CHECK_THROWS_AS(SampleSet::from_missing(4, {0, 1, 2, 3}), InputError);
  CHECK_THROWS_AS(SampleSet::from_missing(4, {4}), InputError);
  CHECK_THROWS_AS(SampleSet::from_missing(4, {1, 1}), InputError);
}
