#include "dcl/oscint.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "dcl/error.hpp"
#include "dcl/parallel.hpp"

namespace dcl {

namespace {

constexpr int kPanelNodes = 16;
using Gauss16 = boost::math::quadrature::gauss<double, kPanelNodes>;

double norm(std::span<const double> v) { return l2_norm(v); }

// Angular transform G(v) = int_{S^(n-1)} Omega(theta) e(v . theta) dtheta for
// v = r xi, evaluated at a fixed xi for varying r.
class SphereTransform {
 public:
  SphereTransform(const KernelFamily& fam, std::span<const double> xi) : n_(fam.n) {
    if (n_ == 1) {
      const double plus[1] = {1.0}, minus[1] = {-1.0};
      om_plus_ = fam.omega(plus);
      om_minus_ = fam.omega(minus);
      xi0_ = xi[0];
    }
  }

  void set_angles(const KernelFamily& fam, std::span<const double> xi, double r_max) {
    if (n_ != 2) return;
    const double bw = kTwoPi * r_max * norm(xi);
    const int order = fam.kind == OmegaKind::Harmonic ? fam.index : 1;
    int count = static_cast<int>(std::ceil(bw + order + 40.0 + 10.0 * std::cbrt(bw)));
    count = (count + 3) / 4 * 4;
    weight_ = kTwoPi / count;
    omega_.resize(static_cast<std::size_t>(count));
    proj_.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double t = kTwoPi * k / count;
      const double u[2] = {std::cos(t), std::sin(t)};
      omega_[static_cast<std::size_t>(k)] = fam.omega(u);
      proj_[static_cast<std::size_t>(k)] = static_cast<long double>(xi[0]) * u[0] +
                                           static_cast<long double>(xi[1]) * u[1];
    }
  }

  std::size_t nodes() const { return n_ == 1 ? 2 : omega_.size(); }

  cplx operator()(double r) const {
    if (n_ == 1) {
      const cplx e = expi(static_cast<long double>(r) * xi0_);
      return om_plus_ * e + om_minus_ * std::conj(e);
    }
    CompensatedSum acc;
    for (std::size_t k = 0; k < omega_.size(); ++k) {
      if (omega_[k] != 0.0) acc.add(omega_[k] * expi(static_cast<long double>(r) * proj_[k]));
    }
    return acc.value() * weight_;
  }

 private:
  int n_;
  double om_plus_ = 0.0, om_minus_ = 0.0, xi0_ = 0.0;
  double weight_ = 0.0;
  std::vector<double> omega_;
  std::vector<long double> proj_;
};

// Panel edges on [r0, r1]: min_panels equal panels, each split so that the
// local frequency |xi| + 2d|lambda| r^(2d-1) gets `resolution` nodes per wavelength.
std::vector<double> base_panels(double r0, double r1, double xi_norm, double lambda, int d,
                                const QuadratureSpec& quad) {
  std::vector<double> edges{r0};
  const double width = (r1 - r0) / quad.min_panels;
  for (int p = 0; p < quad.min_panels; ++p) {
    const double a = r0 + width * p;
    const double b = p + 1 == quad.min_panels ? r1 : r0 + width * (p + 1);
    const double freq = xi_norm + 2.0 * d * std::abs(lambda) * std::pow(b, 2 * d - 1);
    const int split = std::max(1, static_cast<int>(std::ceil((b - a) * quad.resolution * freq / kPanelNodes)));
    for (int k = 1; k <= split; ++k) edges.push_back(k == split ? b : a + (b - a) * k / split);
  }
  return edges;
}

struct LevelSum {
  cplx value;
  double magnitude = 0.0;  // sum of |f| w, for a rounding floor
};

LevelSum integrate_level(const std::vector<double>& edges, int level, int j, int d, double lambda,
                         const SphereTransform& G) {
  const auto& xs = Gauss16::abscissa();
  const auto& ws = Gauss16::weights();
  const int sub = 1 << level;
  CompensatedSum acc;
  double mag = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a0 = edges[p];
    const double h = (edges[p + 1] - a0) / sub;
    for (int s = 0; s < sub; ++s) {
      const double a = a0 + h * s;
      const double mid = a + 0.5 * h;
      const double half = 0.5 * h;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          const double r = mid + sgn * half * xs[i];
          const double w = dyadic_weight(j, r);
          if (w == 0.0) continue;
          const double amp = half * ws[i] * w / r;
          const long double ph = static_cast<long double>(lambda) * std::pow(static_cast<long double>(r), 2 * d);
          const cplx f = amp * expi(ph) * G(r);
          acc.add(f);
          mag += std::abs(f);
          if (xs[i] == 0.0) break;
        }
      }
    }
  }
  return {acc.value(), mag};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(resolution >= 4.0)) throw ConfigError("quadrature resolution must be at least 4");
  if (!(abs_tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (min_panels < 1) throw ConfigError("quadrature min_panels must be positive");
  if (max_refinements < 0) throw ConfigError("quadrature max_refinements must be non-negative");
}

double sphere_mean(const KernelFamily& fam) {
  fam.validate();
  if (fam.n == 1) {
    const double p[1] = {1.0}, m[1] = {-1.0};
    return 0.5 * (fam.omega(p) + fam.omega(m));
  }
  if (fam.n == 2) {
    constexpr int count = 4096;
    CompensatedSum acc;
    for (int k = 0; k < count; ++k) {
      const double t = kTwoPi * k / count;
      const double u[2] = {std::cos(t), std::sin(t)};
      acc.add(fam.omega(u));
    }
    return acc.value().real() / count;
  }
  if (fam.n == 3) {
    // Gauss-Legendre in z = cos(theta) times trapezoid in phi.
    const auto& xs = Gauss16::abscissa();
    const auto& ws = Gauss16::weights();
    constexpr int count = 64;
    CompensatedSum acc;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double z = sgn * xs[i];
        const double rho = std::sqrt(1.0 - z * z);
        for (int k = 0; k < count; ++k) {
          const double t = kTwoPi * k / count;
          const double u[3] = {rho * std::cos(t), rho * std::sin(t), z};
          acc.add(ws[i] * fam.omega(u) / count);
        }
      }
    }
    return acc.value().real() / 2.0;
  }
  throw DomainError("sphere_mean: only n <= 3 is supported");
}

QuadResult phi(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
               const QuadratureSpec& quad) {
  if (j < 1) throw DomainError("phi: j must be positive");
  if (static_cast<int>(xi.size()) != fam.n) throw DomainError("phi: xi has the wrong dimension");
  if (fam.n > 2) throw DomainError("phi: polar quadrature is implemented for n <= 2");
  quad.validate();
  const double r0 = piece_inner_radius(j);
  const double r1 = piece_outer_radius(j);
  SphereTransform G(fam, xi);
  G.set_angles(fam, xi, r1);
  const auto edges = base_panels(r0, r1, norm(xi), lambda, fam.d, quad);
  const std::uint64_t per_level =
      static_cast<std::uint64_t>(edges.size() - 1) * kPanelNodes * G.nodes();
  if (3 * per_level > quad.node_budget) {
    throw BudgetError("phi: " + std::to_string(3 * per_level) + " nodes exceed the node budget");
  }
  QuadResult out;
  LevelSum prev = integrate_level(edges, 0, j, fam.d, lambda, G);
  out.nodes = per_level;
  for (int level = 1;; ++level) {
    const LevelSum cur = integrate_level(edges, level, j, fam.d, lambda, G);
    out.nodes += per_level << level;
    out.value = cur.value;
    out.error_estimate = std::abs(cur.value - prev.value) + 1e-15 * cur.magnitude;
    if (out.error_estimate <= quad.abs_tol) {
      out.converged = true;
      return out;
    }
    if (level > quad.max_refinements || out.nodes + (per_level << (level + 1)) > quad.node_budget) {
      out.converged = false;
      return out;
    }
    prev = cur;
  }
}

QuadResult phi_star(const KernelFamily& fam, int j, double nu, std::span<const double> xi,
                    const ArcParams& params, const QuadratureSpec& quad) {
  if (std::abs(nu) <= params.xj_radius(j)) return phi(fam, j, nu, xi, quad);
  return {};
}

int phi_s_first_scale(int s, const ArcParams& params) {
  if (s < 1) throw DomainError("phi_s: s must be positive");
  return static_cast<int>(std::ceil(s / params.eps1 - 1e-9));
}

double vdc_weight(int j, int d, double lambda, std::span<const double> xi) {
  return 1.0 + std::ldexp(std::abs(lambda), 2 * d * j) + std::ldexp(l2_norm(xi), j);
}

PhiSResult phi_s(const KernelFamily& fam, int s, double lambda, std::span<const double> xi,
                 const ArcParams& params, int J_max, const QuadratureSpec& quad, double c_vdc) {
  const int j0 = phi_s_first_scale(s, params);
  if (J_max < j0) throw DomainError("phi_s: J_max below the first admissible scale");
  PhiSResult out;
  CompensatedSum acc;
  for (int j = j0; j <= J_max; ++j) {
    if (std::abs(lambda) > params.xj_radius(j)) continue;
    const auto r = phi(fam, j, lambda, xi, quad);
    acc.add(r.value);
    out.quad_error += r.error_estimate;
    out.scales.push_back(j);
  }
  out.value = acc.value();

  const double p = 1.0 / (2.0 * fam.d);
  const double xn = l2_norm(xi);
  if (lambda == 0.0) {
    // Every scale admits lambda = 0; Phi_{j,0}(0) vanishes by the mean-zero condition.
    if (xn > 0.0) {
      out.tail_bound = c_vdc * std::pow(std::ldexp(xn, J_max + 1), -p) / (1.0 - std::exp2(-p));
    }
    return out;
  }
  const double j_star = std::log2(1.0 / std::abs(lambda)) / (2.0 * fam.d - params.eps1);
  for (int j = J_max + 1; j <= static_cast<int>(std::floor(j_star)) + 1; ++j) {
    if (std::abs(lambda) > params.xj_radius(j)) continue;
    out.tail_bound += c_vdc * std::pow(vdc_weight(j, fam.d, lambda, xi), -p);
  }
  return out;
}

VdcReport verify_phi_decay(const KernelFamily& fam, int j_lo, int j_hi,
                           std::span<const PhiPoint> grid, const QuadratureSpec& quad) {
  if (j_lo < 1 || j_hi < j_lo) throw DomainError("verify_phi_decay: bad scale range");
  VdcReport rep;
  const std::size_t P = grid.size();
  for (int j = j_lo; j <= j_hi; ++j) {
    std::vector<double> norm_val(P), qerr(P);
    std::vector<char> ok(P);
    parallel_for(P, [&](std::size_t i) {
      const auto r = phi(fam, j, grid[i].lambda, grid[i].xi, quad);
      const double w = vdc_weight(j, fam.d, grid[i].lambda, grid[i].xi);
      norm_val[i] = std::abs(r.value) * std::pow(w, 1.0 / (2.0 * fam.d));
      qerr[i] = r.error_estimate;
      ok[i] = r.converged;
    });
    double best = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      best = std::max(best, norm_val[i]);
      rep.max_quad_error = std::max(rep.max_quad_error, qerr[i]);
      if (!ok[i]) ++rep.unconverged;
    }
    rep.scales.push_back(j);
    rep.per_scale.push_back(best);
    rep.c_vdc = std::max(rep.c_vdc, best);
  }
  return rep;
}

}  // namespace dcl
