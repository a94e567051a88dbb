#include "s2vntm/vmf.hpp"

#include <cmath>
#include <numbers>

#include "s2vntm/errors.hpp"

namespace s2vntm {

namespace {

constexpr double kPi = std::numbers::pi;

double log_sphere_area(int dim) {
  // |S^{M-1}| = 2 pi^{M/2} / Gamma(M/2)
  const double half = 0.5 * dim;
  return std::log(2.0) + half * std::log(kPi) - std::lgamma(half);
}

void check_dim(int dim) {
  if (dim < 2) throw DomainError("vMF needs dimension >= 2");
}

// Wood's envelope parameter b, written to stay accurate for large kappa.
double wood_b(int dim, double kappa) {
  const double m1 = dim - 1.0;
  return m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
}

double wood_db_dkappa(int dim, double kappa) {
  const double m1 = dim - 1.0;
  const double r = std::sqrt(4.0 * kappa * kappa + m1 * m1);
  const double s = 2.0 * kappa + r;
  return -m1 * (2.0 + 4.0 * kappa / r) / (s * s);
}

struct Marginal {
  double w;
  double one_minus_w;
};

Marginal marginal(double b, double eps) {
  const double denom = 1.0 - (1.0 - b) * eps;
  return {(1.0 - (1.0 + b) * eps) / denom, 2.0 * b * eps / denom};
}

}  // namespace

double vmf_log_normalizer(int dim, double kappa) {
  check_dim(dim);
  if (kappa < 0.0) throw DomainError("kappa must be >= 0");
  if (kappa == 0.0) return -log_sphere_area(dim);
  const double nu = 0.5 * dim - 1.0;
  return nu * std::log(kappa) - 0.5 * dim * std::log(2.0 * kPi) - log_bessel_iv(nu, kappa);
}

double vmf_log_density(const Eigen::VectorXd& t, const VmfParams& params) {
  if (t.size() != params.mu.size()) throw ShapeMismatch("vmf_log_density: dimension mismatch");
  if (std::abs(t.norm() - 1.0) > 1e-6) throw DomainError("vmf_log_density: t is not a unit vector");
  return vmf_log_normalizer(params.dim(), params.kappa) + params.kappa * params.mu.dot(t);
}

double vmf_kl_uniform(int dim, double kappa) {
  check_dim(dim);
  if (kappa < 0.0) throw DomainError("kappa must be >= 0");
  if (kappa == 0.0) return 0.0;
  if (kappa < 1e-4) return kappa * kappa / (2.0 * dim);  // leading term; avoids cancellation
  const double nu = 0.5 * dim - 1.0;
  const double kl = kappa * bessel_ratio(nu, kappa) + vmf_log_normalizer(dim, kappa) + log_sphere_area(dim);
  return std::max(kl, 0.0);
}

double vmf_kl_uniform_dkappa(int dim, double kappa) {
  check_dim(dim);
  if (kappa <= 0.0) return 0.0;
  if (kappa < 1e-4) return kappa / dim;
  // d/dk [k A(k)] - A(k) with A' = 1 - A^2 - (M-1) A / k
  const double a = bessel_ratio(0.5 * dim - 1.0, kappa);
  return kappa * (1.0 - a * a) - (dim - 1.0) * a;
}

VmfNoise draw_vmf_noise(int dim, double kappa, Rng& rng) {
  check_dim(dim);
  const double m1 = dim - 1.0;
  const double b = wood_b(dim, kappa);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);

  std::gamma_distribution<double> gamma(0.5 * m1, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  VmfNoise noise;
  bool accepted = false;
  for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    if (g1 + g2 == 0.0) continue;
    const double eps = g1 / (g1 + g2);
    const double w = marginal(b, eps).w;
    const double u = uniform(rng);
    if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      noise.eps = eps;
      accepted = true;
    }
  }
  if (!accepted) throw SamplerStuck("vMF rejection sampler exceeded 1000 proposals");

  std::normal_distribution<double> normal(0.0, 1.0);
  noise.tangent.resize(dim - 1);
  do {
    for (int i = 0; i < dim - 1; ++i) noise.tangent[i] = normal(rng);
  } while (noise.tangent.norm() == 0.0);
  noise.tangent.normalize();
  return noise;
}

double vmf_marginal_w(int dim, double kappa, double eps) { return marginal(wood_b(dim, kappa), eps).w; }

Eigen::VectorXd vmf_transform(const VmfParams& params, const VmfNoise& noise) {
  const int dim = params.dim();
  check_dim(dim);
  const Marginal m = marginal(wood_b(dim, params.kappa), noise.eps);
  const double radial = std::sqrt(std::max(0.0, m.one_minus_w * (2.0 - m.one_minus_w)));

  Eigen::VectorXd z(dim);
  z[0] = m.w;
  z.tail(dim - 1) = radial * noise.tangent;

  Eigen::VectorXd a = -params.mu;
  a[0] += 1.0;
  const double na = a.norm();
  if (na < 1e-12) return z;
  const Eigen::VectorXd u = a / na;
  return z - 2.0 * u * u.dot(z);
}

VmfGradient vmf_transform_backward(const VmfParams& params, const VmfNoise& noise,
                                   const Eigen::VectorXd& grad_sample) {
  const int dim = params.dim();
  const double b = wood_b(dim, params.kappa);
  const Marginal m = marginal(b, noise.eps);
  const double radial = std::sqrt(std::max(0.0, m.one_minus_w * (2.0 - m.one_minus_w)));

  Eigen::VectorXd z(dim);
  z[0] = m.w;
  z.tail(dim - 1) = radial * noise.tangent;

  VmfGradient grad;
  grad.mu = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad_z = grad_sample;

  Eigen::VectorXd a = -params.mu;
  a[0] += 1.0;
  const double na = a.norm();
  if (na >= 1e-12) {
    const Eigen::VectorXd u = a / na;
    const double uz = u.dot(z);
    const double ug = u.dot(grad_sample);
    grad_z = grad_sample - 2.0 * u * ug;
    const Eigen::VectorXd grad_u = -2.0 * (uz * grad_sample + ug * z);
    const Eigen::VectorXd grad_a = (grad_u - u * u.dot(grad_u)) / na;
    grad.mu = -grad_a;
  }

  double grad_w = grad_z[0];
  if (radial > 1e-300) grad_w += grad_z.tail(dim - 1).dot(noise.tangent) * (-m.w / radial);

  const double eps = noise.eps;
  const double numer = 1.0 - (1.0 + b) * eps;
  const double denom = 1.0 - (1.0 - b) * eps;
  const double dw_db = -eps * (denom + numer) / (denom * denom);
  grad.kappa = grad_w * dw_db * wood_db_dkappa(dim, params.kappa);
  return grad;
}

Eigen::VectorXd vmf_sample(const VmfParams& params, Rng& rng) {
  return vmf_transform(params, draw_vmf_noise(params.dim(), params.kappa, rng));
}

}  // namespace s2vntm
