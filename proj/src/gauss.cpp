#include "dtl/gauss.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dtl {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438187;
constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

void require_finite(double z, const char* who) {
  if (!std::isfinite(z)) {
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (spec.node_count < 16) {
    throw std::invalid_argument("QuadratureSpec: node_count must be >= 16");
  }
  if (!(spec.truncation_halfwidth >= 8.0)) {
    throw std::invalid_argument(
        "QuadratureSpec: truncation_halfwidth must be >= 8");
  }
}

double std_normal_pdf(double z) {
  require_finite(z, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double std_normal_cdf(double z) {
  require_finite(z, "std_normal_cdf");
  return 0.5 * std::erfc(-z / kSqrt2);
}

double inverse_mills(double z) {
  require_finite(z, "inverse_mills");
  if (z >= -6.0) {
    const double r = std_normal_pdf(z) / std_normal_cdf(z);
    // phi underflows past z ~ 38.6; keep the result strictly positive.
    return r > 0.0 ? r : std::numeric_limits<double>::denorm_min();
  }
  // Laplace continued fraction: Phi(-x)/phi(x) = 1/(x + 1/(x + 2/(x + ...)));
  // backward recurrence, fully converged for x >= 6 at 100 levels.
  const double x = -z;
  double t = 0.0;
  for (int k = 100; k >= 1; --k) {
    t = k / (x + t);
  }
  return x + t;
}

IdentityTriple phi_phi_moments(double a, double b) {
  require_finite(a, "phi_phi_moments");
  require_finite(b, "phi_phi_moments");
  const double s2 = 1.0 + a * a;
  const double s = std::sqrt(s2);
  const double u = b / s;
  const double i0 = std_normal_cdf(u);
  const double i1 = -a * b / (s2 * s) * std_normal_pdf(u);
  return IdentityTriple{i0, i1, i0 + a * i1};
}

double gauss_hermite_expect(
    const std::function<double(std::span<const double>)>& f, int k,
    const QuadratureSpec& spec) {
  validate(spec);
  if (k < 1 || k > 3) {
    throw std::invalid_argument("gauss_hermite_expect: dimension must be 1, 2 or 3");
  }
  const detail::QuadRule& rule = detail::gauss_hermite_rule(spec.node_count);
  const int n = spec.node_count;
  const double norm = std::pow(1.0 / std::sqrt(kPi), k);
  double z[3];
  double total = 0.0;
  if (k == 1) {
    for (int i = 0; i < n; ++i) {
      z[0] = kSqrt2 * rule.nodes[i];
      total += rule.weights[i] * f(std::span<const double>(z, 1));
    }
  } else if (k == 2) {
    for (int i = 0; i < n; ++i) {
      z[0] = kSqrt2 * rule.nodes[i];
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        z[1] = kSqrt2 * rule.nodes[j];
        row += rule.weights[j] * f(std::span<const double>(z, 2));
      }
      total += rule.weights[i] * row;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      z[0] = kSqrt2 * rule.nodes[i];
      double plane = 0.0;
      for (int j = 0; j < n; ++j) {
        z[1] = kSqrt2 * rule.nodes[j];
        double row = 0.0;
        for (int l = 0; l < n; ++l) {
          z[2] = kSqrt2 * rule.nodes[l];
          row += rule.weights[l] * f(std::span<const double>(z, 3));
        }
        plane += rule.weights[j] * row;
      }
      total += rule.weights[i] * plane;
    }
  }
  return total * norm;
}

namespace detail {

const QuadRule& gauss_hermite_rule(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Golub-Welsch: eigen-decompose the Jacobi matrix of the Hermite
  // recurrence (weight exp(-t^2)); weights from the first eigenvector rows.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
  for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)),
                            Eigen::ComputeEigenvectors);
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(kPi);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v * v;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

const QuadRule& gauss_legendre_rule(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace detail
}  // namespace dtl
