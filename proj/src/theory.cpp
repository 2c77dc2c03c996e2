#include "dtl/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace dtl {

namespace {

void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
}

void require_nonpositive_d1(double d1, const char* who) {
  require_finite(d1, who);
  if (d1 > 0.0) {
    throw std::invalid_argument(std::string(who) + ": requires d1 <= 0");
  }
}

// Joint density of (D1, D2) restricted to the selection branch whose
// loser-minus-winner mean difference is delta, evaluated by integrating the
// winner mean out analytically (a product of three Gaussians in one
// variable). The full joint density of (D1, D2) is the sum over the two
// branches delta = +theta and delta = -theta.
double branch_density(double d1, double d2, double delta, double s1,
                      double s2) {
  const double b1 = (d1 - delta) / s1;
  const double a2 = s1 / s2;
  const double b2 = d2 / s2;
  const double a = 2.0 + a2 * a2;
  const double b = 2.0 * (b1 + a2 * b2);
  const double c = b1 * b1 + b2 * b2;
  return std::exp(-0.5 * (c - b * b / (4.0 * a))) /
         (2.0 * std::numbers::pi * std::sqrt(a) * s1 * s2);
}

// Conditional mean of S1 = winner mean - its true mean, given
// (D1, D2) = (d1, d2) and the branch with loser-minus-winner gap delta.
double branch_mean(double d1, double d2, double delta, double n1, double n2) {
  return (n1 * delta - n1 * d1 - n2 * d2) / (2.0 * n1 + n2);
}

// Logistic weight of the "+theta" branch (winner is the worse arm), in a
// form that never overflows.
double plus_branch_weight(double x_tilde) {
  if (x_tilde >= 0.0) {
    return 1.0 / (1.0 + std::exp(-2.0 * x_tilde));
  }
  const double e = std::exp(2.0 * x_tilde);
  return e / (1.0 + e);
}

double x_tilde_of(const TheoryContext& ctx, double d1, double d2) {
  const double n1 = ctx.design.n1;
  const double n2 = ctx.design.n2;
  const double bign = 2.0 * n1 + n2;
  const double sig2 = ctx.design.sigma * ctx.design.sigma;
  return n1 * ctx.theta * ((n1 + n2) * d1 - n2 * d2) / (bign * sig2);
}

// Estimator shift psi(d1, d2) in the (xi, zeta) coordinates used by the
// quadrature: xi = n2*d2 - (n1+n2)*d1 = (n1+n2)*(t1-t2), zeta = d1.
double shift_value(EstimatorId id, const TrialDesign& design, double d1,
                   double d2) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  const double xi = n2 * d2 - (n1 + n2) * d1;
  const double c = -n1 * xi / ((n1 + n2) * bign);  // = (n1/N)*(t2-t1)
  switch (id) {
    case EstimatorId::MLE:
      return 0.0;
    case EstimatorId::UMVCUE:
      return psi_bg(design, d1, d2);
    case EstimatorId::SINGLE_STAGE:
      return psi_zero(design, d1, d2);
    case EstimatorId::UMVCUE_IMPROVED: {
      const double psi = psi_bg(design, d1, d2);
      const bool improved = (psi < c && c <= 0.0) || (0.0 <= c && c < psi);
      return improved ? c : psi;
    }
    case EstimatorId::SINGLE_STAGE_IMPROVED: {
      const double psi = psi_zero(design, d1, d2);
      const bool improved = (psi < c && c <= 0.0) || (0.0 <= c && c < psi);
      return improved ? c : psi;
    }
    case EstimatorId::SINGLE_STAGE_RB: {
      const double sigma1 = design.sigma * std::sqrt(n2 / (n1 * (n1 + n2)));
      return sigma1 * inverse_mills(xi / ((n1 + n2) * sigma1));
    }
    case EstimatorId::DELTA1: {
      if (xi <= 0.0) {
        return c;  // pooled mean branch: delta1 - t1 = c
      }
      const double sigma1 = design.sigma * std::sqrt(n2 / (n1 * (n1 + n2)));
      const double z = xi / ((n1 + n2) * sigma1);
      const double alpha = n1 / bign;
      const double phi_z = std_normal_cdf(z);
      const double bracket = std_normal_cdf(-alpha * z) - std_normal_cdf(-z);
      return c * bracket / phi_z +
             sigma1 * std_normal_pdf(alpha * z) / phi_z;
    }
  }
  throw std::invalid_argument("shift_value: unknown estimator tag");
}

// Root xi* > 0 of sigma*k*mills(k*xi/sigma) = n1*xi/((n1+n2)*(2n1+n2)): the
// right edge of the improvement region of psi_bg. Left side decreases from
// a positive value, right side increases from 0, so the root is unique.
double improvement_region_edge(const TrialDesign& design) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  const double k = std::sqrt(n1 / (n2 * (n1 + n2)));
  const auto gap = [&](double xi) {
    return design.sigma * k * inverse_mills(k * xi / design.sigma) -
           n1 * xi / ((n1 + n2) * bign);
  };
  double hi = design.sigma;
  for (int i = 0; i < 200 && gap(hi) > 0.0; ++i) {
    hi *= 2.0;
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Two-component integral over the (xi, zeta) strip zeta in [zeta_lo, 0],
// xi spanning the given sorted edge list. Composite Gauss-Legendre panels
// sized by the axis scales; when zeta_kink is set the inner axis is split
// at zeta = -xi/(2n1+n2) (the only zeta-dependent non-smoothness, from the
// single-stage improvement region). Deterministic node order.
struct StripSpec {
  std::vector<double> xi_edges;
  double zeta_lo = -1.0;
  double scale_xi = 1.0;
  double scale_zeta = 1.0;
  bool zeta_kink = false;
  double bign = 1.0;
};

template <typename F>
std::array<double, 2> integrate_strip(const StripSpec& strip, int order,
                                      F&& f) {
  const detail::QuadRule& rule = detail::gauss_legendre_rule(order);
  std::array<double, 2> total{0.0, 0.0};
  for (std::size_t seg = 0; seg + 1 < strip.xi_edges.size(); ++seg) {
    const double xa = strip.xi_edges[seg];
    const double xb = strip.xi_edges[seg + 1];
    if (!(xb > xa)) {
      continue;
    }
    const int nx = std::max(
        1, static_cast<int>(std::ceil((xb - xa) / (2.5 * strip.scale_xi))));
    for (int px = 0; px < nx; ++px) {
      const double pa = xa + (xb - xa) * px / nx;
      const double pb = xa + (xb - xa) * (px + 1) / nx;
      const double xm = 0.5 * (pa + pb);
      const double xh = 0.5 * (pb - pa);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double xi = xm + xh * rule.nodes[i];
        const double wx = xh * rule.weights[i];
        // inner zeta edges
        std::array<double, 3> zedges{strip.zeta_lo, 0.0, 0.0};
        std::size_t nedges = 2;
        if (strip.zeta_kink && xi > 0.0) {
          const double zb = -xi / strip.bign;
          if (zb > strip.zeta_lo && zb < 0.0) {
            zedges = {strip.zeta_lo, zb, 0.0};
            nedges = 3;
          }
        }
        std::array<double, 2> inner{0.0, 0.0};
        for (std::size_t zs = 0; zs + 1 < nedges; ++zs) {
          const double za = zedges[zs];
          const double zb = zedges[zs + 1];
          const int nz = std::max(
              1,
              static_cast<int>(std::ceil((zb - za) / (2.5 * strip.scale_zeta))));
          for (int pz = 0; pz < nz; ++pz) {
            const double qa = za + (zb - za) * pz / nz;
            const double qb = za + (zb - za) * (pz + 1) / nz;
            const double zm = 0.5 * (qa + qb);
            const double zh = 0.5 * (qb - qa);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
              const double zeta = zm + zh * rule.nodes[j];
              const double wz = zh * rule.weights[j];
              const std::array<double, 2> v = f(xi, zeta);
              inner[0] += wz * v[0];
              inner[1] += wz * v[1];
            }
          }
        }
        total[0] += wx * inner[0];
        total[1] += wx * inner[1];
      }
    }
  }
  return total;
}

template <typename F>
std::array<double, 2> integrate_with_doubling(const StripSpec& strip,
                                              const QuadratureSpec& spec,
                                              const char* who, F&& f) {
  const int order = std::max(8, spec.node_count / 4);
  const std::array<double, 2> coarse = integrate_strip(strip, order, f);
  const std::array<double, 2> fine = integrate_strip(strip, 2 * order, f);
  const double shift = std::max(std::abs(fine[0] - coarse[0]),
                                std::abs(fine[1] - coarse[1]));
  if (!(shift <= 1e-7)) {
    std::ostringstream msg;
    msg << who << ": doubling the quadrature order moved the result by "
        << shift << " (> 1e-7); increase node_count or truncation_halfwidth";
    throw quadrature_nonconvergence(msg.str());
  }
  return fine;
}

std::vector<double> xi_edge_list(double xi_lo, double xi_hi, EstimatorId id,
                                 const TrialDesign& design) {
  std::vector<double> edges{xi_lo, xi_hi};
  if (xi_lo < 0.0 && 0.0 < xi_hi) {
    edges.push_back(0.0);
  }
  if (id == EstimatorId::UMVCUE_IMPROVED) {
    const double xi_star = improvement_region_edge(design);
    if (xi_lo < xi_star && xi_star < xi_hi) {
      edges.push_back(xi_star);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace

TheoryContext::TheoryContext(const TrialDesign& design_, double theta_)
    : design(design_), theta(theta_) {
  validate(design);
  require_finite(theta, "TheoryContext");
  if (theta < 0.0) {
    throw std::invalid_argument("TheoryContext: theta must be >= 0");
  }
  const double n1 = design.n1;
  const double n2 = design.n2;
  sigma_star_sq = design.sigma * design.sigma / (n1 + n2);
  rho = n2 / (n1 + n2);
}

void validate(const BayesPrior& prior) {
  if (!(prior.m > 0.0) || !std::isfinite(prior.m)) {
    throw std::invalid_argument("BayesPrior: m must be positive finite");
  }
}

double density_U(const TheoryContext& ctx, double u) {
  require_finite(u, "density_U");
  const double sigma_star = std::sqrt(ctx.sigma_star_sq);
  const double a = std::sqrt(static_cast<double>(ctx.design.n1)) /
                   (ctx.design.sigma * std::sqrt(1.0 + ctx.rho));
  return (std_normal_cdf(a * (u + ctx.theta)) +
          std_normal_cdf(a * (u - ctx.theta))) *
         std_normal_pdf(u / sigma_star) / sigma_star;
}

double second_moment_U(const TheoryContext& ctx) { return ctx.sigma_star_sq; }

double cond_density_S1(const TheoryContext& ctx, double d1, double d2,
                       double s) {
  require_nonpositive_d1(d1, "cond_density_S1");
  require_finite(d2, "cond_density_S1");
  require_finite(s, "cond_density_S1");
  const double n1 = ctx.design.n1;
  const double n2 = ctx.design.n2;
  const double bign = 2.0 * n1 + n2;
  const double s0 = ctx.design.sigma / std::sqrt(bign);
  const double w1 = plus_branch_weight(x_tilde_of(ctx, d1, d2));
  const double m1 = branch_mean(d1, d2, ctx.theta, n1, n2);
  const double m2 = branch_mean(d1, d2, -ctx.theta, n1, n2);
  return (w1 * std_normal_pdf((s - m1) / s0) +
          (1.0 - w1) * std_normal_pdf((s - m2) / s0)) /
         s0;
}

double cond_expect_S1(const TheoryContext& ctx, double d1, double d2) {
  require_nonpositive_d1(d1, "cond_expect_S1");
  require_finite(d2, "cond_expect_S1");
  const double n1 = ctx.design.n1;
  const double n2 = ctx.design.n2;
  const double bign = 2.0 * n1 + n2;
  return n1 * ctx.theta / bign * std::tanh(x_tilde_of(ctx, d1, d2)) -
         (n1 * d1 + n2 * d2) / bign;
}

double psi_theta(const TheoryContext& ctx, double d1, double d2) {
  require_nonpositive_d1(d1, "psi_theta");
  require_finite(d2, "psi_theta");
  const double n1 = ctx.design.n1;
  const double n2 = ctx.design.n2;
  const double bign = 2.0 * n1 + n2;
  const double sig2 = ctx.design.sigma * ctx.design.sigma;
  const double arg =
      ctx.theta * n1 * (n2 * d2 - (n1 + n2) * d1) / (bign * sig2);
  return n1 * ctx.theta / bign * std::tanh(arg) +
         n1 * ((n1 + n2) * d1 - n2 * d2) / ((n1 + n2) * bign);
}

PsiBounds psi_bounds(const TrialDesign& design, double d1, double d2) {
  validate(design);
  require_nonpositive_d1(d1, "psi_bounds");
  require_finite(d2, "psi_bounds");
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  const double finite_bound =
      n1 * ((n1 + n2) * d1 - n2 * d2) / ((n1 + n2) * bign);
  const double inf = std::numeric_limits<double>::infinity();
  if ((n1 + n2) * d1 <= n2 * d2) {
    return PsiBounds{finite_bound, inf};
  }
  return PsiBounds{-inf, finite_bound};
}

double bayes_estimate(const BayesPrior& prior, const TrialDesign& design,
                      const SufficientStatistics& stats) {
  validate(prior);
  validate(design);
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double shrink = design.sigma * design.sigma / (prior.m * prior.m);
  return (n1 + n2) * stats.t1 / ((n1 + n2) + shrink);
}

double conditional_risk_R1(const TheoryContext& ctx, double d1, double d2,
                           double c) {
  require_nonpositive_d1(d1, "conditional_risk_R1");
  require_finite(d2, "conditional_risk_R1");
  require_finite(c, "conditional_risk_R1");
  const double n1 = ctx.design.n1;
  const double n2 = ctx.design.n2;
  const double bign = 2.0 * n1 + n2;
  const double s0sq = ctx.design.sigma * ctx.design.sigma / bign;
  const double w1 = plus_branch_weight(x_tilde_of(ctx, d1, d2));
  const double m1 = branch_mean(d1, d2, ctx.theta, n1, n2);
  const double m2 = branch_mean(d1, d2, -ctx.theta, n1, n2);
  const double a = ctx.rho * d2 + c;
  return w1 * ((m1 + a) * (m1 + a) + s0sq) +
         (1.0 - w1) * ((m2 + a) * (m2 + a) + s0sq);
}

RiskResult risk_quadrature(const TrialDesign& design, double theta,
                           EstimatorId id, const QuadratureSpec& spec) {
  validate(design);
  validate(spec);
  require_finite(theta, "risk_quadrature");
  if (theta < 0.0) {
    throw std::invalid_argument("risk_quadrature: theta must be >= 0");
  }
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  const double s1 = design.sigma / std::sqrt(n1);
  const double s2 = design.sigma / std::sqrt(n2);
  const double s0sq = design.sigma * design.sigma / bign;
  const double rho = n2 / (n1 + n2);
  const double h = spec.truncation_halfwidth;
  const double hyp = std::sqrt(s1 * s1 + s2 * s2);

  StripSpec strip;
  strip.zeta_lo = -(theta + h * std::numbers::sqrt2 * s1);
  const double d2_half = theta + h * hyp;
  const double xi_lo = -n2 * d2_half;
  const double xi_hi = n2 * d2_half - (n1 + n2) * strip.zeta_lo;
  strip.xi_edges = xi_edge_list(xi_lo, xi_hi, id, design);
  strip.scale_xi = n2 * hyp;
  strip.scale_zeta = std::numbers::sqrt2 * s1;
  strip.zeta_kink = (id == EstimatorId::SINGLE_STAGE_IMPROVED);
  strip.bign = bign;

  const auto integrand = [&](double xi, double zeta) -> std::array<double, 2> {
    const double d1 = zeta;
    const double d2 = (xi + (n1 + n2) * zeta) / n2;
    const double gp = branch_density(d1, d2, theta, s1, s2);
    const double gm = branch_density(d1, d2, -theta, s1, s2);
    const double mp = branch_mean(d1, d2, theta, n1, n2);
    const double mm = branch_mean(d1, d2, -theta, n1, n2);
    const double a = rho * d2 + shift_value(id, design, d1, d2);
    const double mse = gp * ((mp + a) * (mp + a) + s0sq) +
                       gm * ((mm + a) * (mm + a) + s0sq);
    const double bias = gp * (mp + a) + gm * (mm + a);
    return {mse / n2, bias / n2};  // 1/n2 = Jacobian of (d1,d2)->(xi,zeta)
  };
  const std::array<double, 2> r =
      integrate_with_doubling(strip, spec, "risk_quadrature", integrand);
  return RiskResult{r[0], r[1]};
}

double conditional_bias_quadrature(const TrialDesign& design, double mu1,
                                   double mu2, EstimatorId id, int arm,
                                   const QuadratureSpec& spec) {
  validate(design);
  validate(spec);
  require_finite(mu1, "conditional_bias_quadrature");
  require_finite(mu2, "conditional_bias_quadrature");
  if (arm != 1 && arm != 2) {
    throw std::invalid_argument(
        "conditional_bias_quadrature: arm must be 1 or 2");
  }
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  const double s1 = design.sigma / std::sqrt(n1);
  const double s2 = design.sigma / std::sqrt(n2);
  const double rho = n2 / (n1 + n2);
  const double h = spec.truncation_halfwidth;
  // Loser-minus-winner true mean gap on the S = arm branch.
  const double delta = (arm == 1) ? mu2 - mu1 : mu1 - mu2;
  const double p_select = std_normal_cdf(-delta / (s1 * std::numbers::sqrt2));
  if (p_select <= 1e-12) {
    throw std::domain_error(
        "conditional_bias_quadrature: vanishing selection probability");
  }

  StripSpec strip;
  strip.zeta_lo = std::min(0.0, delta) - h * std::numbers::sqrt2 * s1;
  const double d2_half = std::abs(delta) + h * (s1 + s2);
  const double xi_lo = -n2 * d2_half;
  const double xi_hi = n2 * d2_half - (n1 + n2) * strip.zeta_lo;
  strip.xi_edges = xi_edge_list(xi_lo, xi_hi, id, design);
  strip.scale_xi = n2 * std::sqrt(s1 * s1 + s2 * s2);
  strip.scale_zeta = std::numbers::sqrt2 * s1;
  strip.zeta_kink = (id == EstimatorId::SINGLE_STAGE_IMPROVED);
  strip.bign = bign;

  const auto integrand = [&](double xi, double zeta) -> std::array<double, 2> {
    const double d1 = zeta;
    const double d2 = (xi + (n1 + n2) * zeta) / n2;
    const double g = branch_density(d1, d2, delta, s1, s2);
    const double m = branch_mean(d1, d2, delta, n1, n2);
    const double a = rho * d2 + shift_value(id, design, d1, d2);
    return {g * (m + a) / n2, 0.0};
  };
  const std::array<double, 2> r = integrate_with_doubling(
      strip, spec, "conditional_bias_quadrature", integrand);
  return r[0] / p_select;
}

double improvement_region_probability(const TrialDesign& design, double theta,
                                      const QuadratureSpec& spec) {
  validate(design);
  validate(spec);
  require_finite(theta, "improvement_region_probability");
  if (theta < 0.0) {
    throw std::invalid_argument(
        "improvement_region_probability: theta must be >= 0");
  }
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double s1 = design.sigma / std::sqrt(n1);
  const double s2 = design.sigma / std::sqrt(n2);
  const double h = spec.truncation_halfwidth;

  StripSpec strip;
  strip.zeta_lo = -(theta + h * std::numbers::sqrt2 * s1);
  const double xi_star = improvement_region_edge(design);
  strip.xi_edges = {0.0, xi_star};
  strip.scale_xi = n2 * std::sqrt(s1 * s1 + s2 * s2);
  strip.scale_zeta = std::numbers::sqrt2 * s1;

  const auto integrand = [&](double xi, double zeta) -> std::array<double, 2> {
    const double d1 = zeta;
    const double d2 = (xi + (n1 + n2) * zeta) / n2;
    const double g = branch_density(d1, d2, theta, s1, s2) +
                     branch_density(d1, d2, -theta, s1, s2);
    return {g / n2, 0.0};
  };
  const std::array<double, 2> r = integrate_with_doubling(
      strip, spec, "improvement_region_probability", integrand);
  return r[0];
}

}  // namespace dtl
