#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "s2vntm/errors.hpp"
#include "s2vntm/vmf.hpp"

using namespace s2vntm;

namespace {

constexpr double kPi = std::numbers::pi;

// e^{-x} I_n(x) = (1/pi) int_0^pi exp(x (cos t - 1)) cos(n t) dt, composite Simpson.
double log_iv_quadrature(int n, double x) {
  const int steps = 200000;
  const double h = kPi / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * h;
    const double f = std::exp(x * (std::cos(t) - 1.0)) * std::cos(n * t);
    sum += f * (i == 0 || i == steps ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return std::log(sum * h / 3.0 / kPi) + x;
}

double log_sphere_area(int m) { return std::log(2.0) + 0.5 * m * std::log(kPi) - std::lgamma(0.5 * m); }

Eigen::VectorXd random_unit(int m, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v[i] = n(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("log I_v against high-precision reference values") {
  // reference values computed with mpmath at 30 digits
  CHECK(log_bessel_iv(1.0, 1.0) == doctest::Approx(-0.5706479874908312814).epsilon(1e-13));
  CHECK(log_bessel_iv(4.0, 500.0) == doctest::Approx(495.95799171917418797).epsilon(1e-13));
  CHECK(log_bessel_iv(0.5, 3.0) == doctest::Approx(1.5292734930923128847).epsilon(1e-13));
  CHECK(log_bessel_iv(31.0, 2000.0) == doctest::Approx(1995.0403674744800727).epsilon(1e-13));
  CHECK(log_bessel_iv(32.0, 10000.0) == doctest::Approx(9994.4247012648585662).epsilon(1e-13));
  CHECK(log_bessel_iv(0.0, 0.001) == doctest::Approx(2.499999843750017e-7).epsilon(1e-10));
}

TEST_CASE("log I_v matches the integral representation across the series/asymptotic switch") {
  for (int n : {0, 1, 2, 4, 9}) {
    for (double x : {0.3, 2.0, 17.0, 49.0, 51.0, 120.0, 700.0}) {
      if (n == 9 && x < 1.0) continue;  // the integrand cancels to ~1e-13 there
      CAPTURE(n);
      CAPTURE(x);
      CHECK(log_bessel_iv(n, x) == doctest::Approx(log_iv_quadrature(n, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("log I_v agrees with std::cyl_bessel_i where that does not overflow") {
  for (double nu : {0.0, 0.5, 1.5, 3.0, 4.0, 7.5}) {
    for (double x : {0.01, 0.7, 5.0, 40.0, 300.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(log_bessel_iv(nu, x) == doctest::Approx(std::log(std::cyl_bessel_i(nu, x))).epsilon(1e-11));
    }
  }
}

TEST_CASE("half-integer closed form I_1/2(x) = sqrt(2/(pi x)) sinh x") {
  for (double x : {0.2, 3.0, 60.0, 800.0, 5000.0}) {
    const double ref = 0.5 * std::log(2.0 / (kPi * x)) + x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
    CHECK(log_bessel_iv(0.5, x) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("bessel ratio satisfies the three-term recurrence") {
  // I_{v-1} - I_{v+1} = (2v/x) I_v  =>  1/R(v-1) - R(v) = 2v/x
  for (double v : {1.0, 1.5, 4.0, 24.0}) {
    for (double x : {0.5, 8.0, 90.0, 3000.0}) {
      CHECK(1.0 / bessel_ratio(v - 1.0, x) - bessel_ratio(v, x) == doctest::Approx(2.0 * v / x).epsilon(1e-9));
    }
  }
}

TEST_CASE("bessel domain errors") {
  CHECK_THROWS_AS(log_bessel_iv(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(log_bessel_iv(1.0, -0.5), DomainError);
  CHECK_THROWS_AS(log_bessel_iv(1.0, std::nan("")), DomainError);
  CHECK(log_bessel_iv(0.0, 0.0) == 0.0);
  CHECK(std::isinf(log_bessel_iv(2.0, 0.0)));
}

TEST_CASE("normalizer at kappa = 0 is the uniform density") {
  CHECK(vmf_log_normalizer(3, 0.0) == doctest::Approx(-std::log(4.0 * kPi)));
  CHECK(vmf_log_normalizer(2, 0.0) == doctest::Approx(-std::log(2.0 * kPi)));
  // M = 3 closed form C = kappa / (4 pi sinh kappa)
  for (double k : {0.1, 1.0, 10.0, 300.0}) {
    const double ref = std::log(k) - std::log(4.0 * kPi) - (k + std::log1p(-std::exp(-2.0 * k)) - std::log(2.0));
    CHECK(vmf_log_normalizer(3, k) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("log density validates its input") {
  VmfParams p{Eigen::Vector3d(1, 0, 0), 2.0};
  CHECK_THROWS_AS(vmf_log_density(Eigen::Vector3d(1, 1, 0), p), DomainError);
  CHECK_THROWS_AS(vmf_log_density(Eigen::Vector2d(1, 0), p), ShapeMismatch);
}

TEST_CASE("log density integrates to one (uniform-sphere Monte Carlo)") {
  Rng rng(5);
  for (int m : {2, 3, 5, 10}) {
    for (double k : {0.5, 2.0}) {
      const VmfParams p{random_unit(m, rng), k};
      const int n = 200000;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += std::exp(vmf_log_density(random_unit(m, rng), p));
      const double integral = sum / n * std::exp(log_sphere_area(m));
      CAPTURE(m);
      CAPTURE(k);
      CHECK(std::abs(integral - 1.0) < 2e-2);
    }
  }
}

TEST_CASE("KL against uniform: limits, closed form for M = 3, derivative") {
  CHECK(vmf_kl_uniform(5, 0.0) == 0.0);
  CHECK(vmf_kl_uniform(5, 1e-6) == doctest::Approx(1e-12 / 10.0));
  CHECK(vmf_kl_uniform(5, 1e-3) < 1e-6);
  // M = 3: KL = kappa coth kappa - 1 + log(kappa / sinh kappa)
  for (double k : {0.01, 0.5, 1.0, 5.0, 40.0}) {
    const double ref = k / std::tanh(k) - 1.0 + std::log(k) - (k + std::log1p(-std::exp(-2.0 * k)) - std::log(2.0));
    CHECK(vmf_kl_uniform(3, k) == doctest::Approx(ref).epsilon(1e-10));
  }
  double prev = 0.0;
  for (double k = 0.1; k < 200.0; k *= 1.7) {
    const double kl = vmf_kl_uniform(10, k);
    CHECK(kl > prev);
    prev = kl;
  }
  for (int m : {2, 3, 10, 50}) {
    for (double k : {0.05, 1.0, 7.0, 120.0}) {
      const double h = 1e-5 * std::max(1.0, k);
      const double fd = (vmf_kl_uniform(m, k + h) - vmf_kl_uniform(m, k - h)) / (2 * h);
      CHECK(vmf_kl_uniform_dkappa(m, k) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("sampler: unit norm, marginal mean and deterministic replay") {
  Rng rng(9);
  for (int m : {2, 3, 7}) {
    for (double k : {0.01, 3.0, 80.0}) {
      const VmfParams p{random_unit(m, rng), k};
      const int n = 40000;
      double mean_w = 0.0;
      for (int i = 0; i < n; ++i) {
        const VmfNoise noise = draw_vmf_noise(m, k, rng);
        const Eigen::VectorXd t = vmf_transform(p, noise);
        CHECK(std::abs(t.norm() - 1.0) < 1e-12);
        CHECK(vmf_marginal_w(m, k, noise.eps) == doctest::Approx(p.mu.dot(t)).epsilon(1e-9));
        mean_w += p.mu.dot(t);
      }
      mean_w /= n;
      CAPTURE(m);
      CAPTURE(k);
      CHECK(std::abs(mean_w - bessel_ratio(0.5 * m - 1.0, k)) < 0.015);
    }
  }
  Rng a(4), b(4);
  const VmfParams p{Eigen::Vector3d(0, 1, 0), 5.0};
  CHECK(vmf_sample(p, a) == vmf_sample(p, b));
}

TEST_CASE("pathwise gradient through the frozen-noise transform matches finite differences") {
  Rng rng(17);
  for (int m : {2, 4, 9}) {
    for (double k : {0.3, 4.0, 60.0}) {
      VmfParams p{random_unit(m, rng), k};
      const VmfNoise noise = draw_vmf_noise(m, k, rng);
      const Eigen::VectorXd g = random_unit(m, rng);
      const VmfGradient an = vmf_transform_backward(p, noise, g);
      const double h = 1e-6;
      VmfParams q = p;
      q.kappa = k + h * k;
      const double up = g.dot(vmf_transform(q, noise));
      q.kappa = k - h * k;
      const double down = g.dot(vmf_transform(q, noise));
      CHECK(an.kappa == doctest::Approx((up - down) / (2 * h * k)).epsilon(1e-5));
      for (int i = 0; i < m; ++i) {
        VmfParams r = p;
        r.mu[i] += h;
        const double f1 = g.dot(vmf_transform(r, noise));
        r.mu[i] -= 2 * h;
        const double f0 = g.dot(vmf_transform(r, noise));
        CHECK(an.mu[i] == doctest::Approx((f1 - f0) / (2 * h)).epsilon(1e-5).scale(1.0));
      }
    }
  }
}
