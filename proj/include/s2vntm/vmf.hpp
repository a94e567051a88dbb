#pragma once

#include <random>

#include <Eigen/Dense>

namespace s2vntm {

using Rng = std::mt19937_64;

// log I_order(x) for order >= 0, x >= 0. Power series (with rescaling, so no
// overflow) below x = max(50, 2 order^2); Hankel's exponentially scaled
// asymptotic expansion above. Throws DomainError for negative or NaN input.
double log_bessel_iv(double order, double x);

// I_{order+1}(x) / I_order(x).
double bessel_ratio(double order, double x);

struct VmfParams {
  Eigen::VectorXd mu;  // unit direction in R^M
  double kappa = 0.0;  // concentration >= 0

  int dim() const { return static_cast<int>(mu.size()); }
};

// log C_M(kappa) = (M/2-1) log kappa - (M/2) log(2 pi) - log I_{M/2-1}(kappa);
// at kappa = 0 this is minus the log surface area of S^{M-1}.
double vmf_log_normalizer(int dim, double kappa);

// Throws DomainError when ||t|| differs from 1 by more than 1e-6.
double vmf_log_density(const Eigen::VectorXd& t, const VmfParams& params);

// KL(vMF(mu, kappa) || uniform on S^{M-1}); 0 at kappa = 0.
double vmf_kl_uniform(int dim, double kappa);
inline double vmf_kl_uniform(const VmfParams& p) { return vmf_kl_uniform(p.dim(), p.kappa); }
double vmf_kl_uniform_dkappa(int dim, double kappa);

// Randomness consumed by one draw: the accepted Beta variate of Wood's
// rejection sampler and the uniform tangential direction (length M-1).
// Holding it fixed turns sampling into a smooth map of (mu, kappa).
struct VmfNoise {
  double eps = 0.5;
  Eigen::VectorXd tangent;
};

// Throws SamplerStuck after 1000 rejections.
VmfNoise draw_vmf_noise(int dim, double kappa, Rng& rng);

// Marginal w = mu^T t for the given accepted variate.
double vmf_marginal_w(int dim, double kappa, double eps);

// Deterministic sample for fixed noise: build (w, sqrt(1-w^2) tangent) at the
// north pole and reflect it onto mu with a Householder transform.
Eigen::VectorXd vmf_transform(const VmfParams& params, const VmfNoise& noise);

struct VmfGradient {
  Eigen::VectorXd mu;
  double kappa = 0.0;
};

// Pathwise gradient of a scalar loss through vmf_transform, given dL/dsample.
// The kappa term differentiates the accepted w only (no rejection correction).
VmfGradient vmf_transform_backward(const VmfParams& params, const VmfNoise& noise,
                                   const Eigen::VectorXd& grad_sample);

Eigen::VectorXd vmf_sample(const VmfParams& params, Rng& rng);

}  // namespace s2vntm
