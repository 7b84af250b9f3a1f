#pragma once

// Oscillatory integrals Phi_{j,lambda}(xi) = int e(lambda|y|^(2d) + xi.y) K_j(y) dy,
// their windowed versions and partial sums over scales.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dcl/kernels.hpp"
#include "dcl/numeric.hpp"
#include "dcl/rationals.hpp"

namespace dcl {

struct QuadratureSpec {
  double resolution = 8.0;       // nodes per local wavelength, >= 4
  int min_panels = 32;           // radial panels before frequency refinement
  int max_refinements = 6;       // extra doublings when the estimate misses abs_tol
  double abs_tol = 1e-10;
  std::uint64_t node_budget = 50'000'000;

  /// Throws ConfigError on resolution < 4, tol <= 0 or non-positive counts.
  void validate() const;
};

struct QuadResult {
  cplx value;
  double error_estimate = 0.0;  // difference of the last two refinement levels
  std::uint64_t nodes = 0;
  bool converged = true;
};

/// Mean of Omega over the unit sphere (n <= 3), by a rule exact for the built-in profiles.
double sphere_mean(const KernelFamily& fam);

/// Phi_{j,lambda}(xi) in polar form over supp K_j, n in {1, 2}. Unconverged
/// results are returned with converged = false; BudgetError if the node count
/// of the finest level would exceed the budget.
QuadResult phi(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
               const QuadratureSpec& quad = {});

/// phi if |nu| <= 2^(-2dj + eps1 j) (closed), otherwise exactly 0.
QuadResult phi_star(const KernelFamily& fam, int j, double nu, std::span<const double> xi,
                    const ArcParams& params, const QuadratureSpec& quad = {});

/// Smallest j with s <= eps1 j.
int phi_s_first_scale(int s, const ArcParams& params);

struct PhiSResult {
  cplx value;
  double tail_bound = 0.0;   // bound on the omitted scales j > J_max
  double quad_error = 0.0;   // sum of per-scale quadrature estimates
  std::vector<int> scales;   // scales whose window admitted lambda
};

/// sum_{j_first <= j <= J_max} Phi*_{j,lambda}(xi). The tail beyond J_max is
/// bounded by c_vdc sum (1 + 2^(2dj)|lambda| + 2^j|xi|)^(-1/(2d)) over the
/// omitted scales whose window admits lambda.
PhiSResult phi_s(const KernelFamily& fam, int s, double lambda, std::span<const double> xi,
                 const ArcParams& params, int J_max, const QuadratureSpec& quad = {},
                 double c_vdc = 4.0);

/// Decay-normalized magnitude |Phi| (1 + 2^(2dj)|lambda| + 2^j|xi|)^(1/(2d)).
double vdc_weight(int j, int d, double lambda, std::span<const double> xi);

struct PhiPoint {
  double lambda = 0.0;
  std::vector<double> xi;
};

struct VdcReport {
  double c_vdc = 0.0;
  std::vector<int> scales;
  std::vector<double> per_scale;  // max normalized magnitude at each scale
  double max_quad_error = 0.0;
  std::uint64_t unconverged = 0;
};

/// Max over scales j_lo..j_hi and grid points of |Phi_{j,lambda}(xi)| (1 + 2^(2dj)|lambda| + 2^j|xi|)^(1/(2d)).
VdcReport verify_phi_decay(const KernelFamily& fam, int j_lo, int j_hi,
                           std::span<const PhiPoint> grid, const QuadratureSpec& quad = {});

}  // namespace dcl
