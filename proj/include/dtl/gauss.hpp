#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dtl {

// Configuration for the deterministic quadrature oracles.
// node_count is the Gauss-Hermite node count per axis (and the per-axis
// resolution knob of the region-based risk oracles); truncation_halfwidth is
// the integration range of the region-based oracles, in standard deviations.
struct QuadratureSpec {
  int node_count = 80;
  double truncation_halfwidth = 13.0;
};

// Throws std::invalid_argument unless node_count >= 16 and halfwidth >= 8.
void validate(const QuadratureSpec& spec);

// The three Gaussian product integrals for parameters (a, b):
//   i0 = integral Phi(a x + b) phi(x) dx
//   i1 = integral x phi(a x + b) phi(x) dx
//   i2 = integral x^2 Phi(a x + b) phi(x) dx
struct IdentityTriple {
  double i0;
  double i1;
  double i2;
};

// Standard normal density phi(z). Rejects non-finite input.
double std_normal_pdf(double z);

// Standard normal cdf Phi(z) via erfc; absolute error <= 1e-15.
double std_normal_cdf(double z);

// phi(z)/Phi(z). Direct ratio for z >= -6; Laplace continued fraction below
// that, so the far left tail keeps full relative precision without ever
// forming the underflowing phi/Phi quotient. Always positive, strictly
// decreasing.
double inverse_mills(double z);

// Closed forms: i0 = Phi(b/s), i1 = -a b s^-3 phi(b/s), i2 = i0 + a*i1,
// with s = sqrt(1 + a^2).
IdentityTriple phi_phi_moments(double a, double b);

// E[f(Z_1..Z_k)] for independent standard normals, by tensor-product
// Gauss-Hermite with the change of variables x = sqrt(2) t. k in {1,2,3}.
// Deterministic for a fixed spec; summation order is fixed.
double gauss_hermite_expect(
    const std::function<double(std::span<const double>)>& f, int k,
    const QuadratureSpec& spec);

namespace detail {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Hermite rule for weight exp(-t^2) (Golub-Welsch). Cached.
const QuadRule& gauss_hermite_rule(int n);

// n-point Gauss-Legendre rule on [-1, 1] (Newton on the recurrence). Cached.
const QuadRule& gauss_legendre_rule(int n);

}  // namespace detail
}  // namespace dtl
