#pragma once

// Multiplier operators on finitely supported lattice functions, the discrete
// Carleson maximal operator, TT* kernels and the numerical inequalities used
// to bound them.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dcl/kernels.hpp"
#include "dcl/numeric.hpp"
#include "dcl/rationals.hpp"

namespace dcl {

/// Complex function on Z^n supported in the box lo + [shape], row-major
/// (first axis slowest).
struct LatticeFunction {
  int n = 1;
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> shape;
  std::vector<cplx> values;

  /// Zero function on the cube center +- half_width.
  static LatticeFunction box(int n, std::int64_t half_width, std::int64_t center = 0);
  /// Point mass at x.
  static LatticeFunction delta(std::span<const std::int64_t> x);

  std::size_t size() const { return values.size(); }
  bool contains(std::span<const std::int64_t> x) const;
  /// Value at x, zero outside the box.
  cplx at(std::span<const std::int64_t> x) const;
  cplx& ref(std::span<const std::int64_t> x);
  /// Coordinates of the flat index.
  std::vector<std::int64_t> point(std::size_t idx) const;
  double l2() const;
  double l1() const;
  double linf() const;
  /// Throws DomainError if lo/shape/values are inconsistent.
  void check() const;
};

/// g = sum_{y != 0} f(x - y) e(lambda|y|^(2d)) K_j(y) on the box supp f + [-2^(j+1), 2^(j+1)]^n,
/// by zero-padded FFT convolution with no wraparound.
LatticeFunction apply_mj(const KernelFamily& fam, int j, double lambda, const LatticeFunction& f,
                         std::uint64_t budget = 1ull << 26);

/// Same operator with the combined kernel sum_{j_lo <= j <= j_hi} K_j.
LatticeFunction apply_scales(const KernelFamily& fam, int j_lo, int j_hi, double lambda,
                             const LatticeFunction& f, std::uint64_t budget = 1ull << 26);

/// Adjoint of apply_mj restricted to the output box of apply_mj.
LatticeFunction apply_mj_adjoint(const KernelFamily& fam, int j, double lambda,
                                 const LatticeFunction& g, std::uint64_t budget = 1ull << 26);

/// lambda_i = i/M, optionally with extra points clustered around a/q, q <= refine_q.
class LambdaGrid {
 public:
  explicit LambdaGrid(std::int64_t M);
  /// Adds `points` equally spaced values in a/q +- width for every reduced a/q, q <= refine_q.
  LambdaGrid& refine_near_rationals(std::int64_t refine_q, int points, double width);
  /// Uniform grid with M * factor points, a superset of this grid when only uniform.
  LambdaGrid refined(std::int64_t factor) const;

  const std::vector<double>& values() const { return values_; }
  std::int64_t uniform_count() const { return M_; }
  double max_spacing() const;

 private:
  std::int64_t M_;
  std::vector<double> values_;
};

struct CarlesonResult {
  LatticeFunction Cf;                 // real magnitudes stored as complex
  std::vector<double> argmax_lambda;  // smallest maximizing grid value per site
  double grid_error_bound = 0.0;      // additive bound on sup over [0,1) vs max over the grid
};

/// Cf(x) = max over the grid of |sum_{1 <= j <= J} (e(lambda|y|^(2d)) K_j) * f (x)|.
CarlesonResult carleson_apply(const KernelFamily& fam, const LatticeFunction& f, int J,
                              const LambdaGrid& grid);

/// Lipschitz constant in lambda: 2 pi max|y|^(2d) sum_j sum_y |K_j(y)| ||f||_inf,
/// so the grid maximum is within this times max_spacing/2 of the true supremum.
double carleson_lambda_lipschitz(const KernelFamily& fam, int J, double f_linf);

struct NormRatioStats {
  double max_ratio = 0.0;
  std::vector<double> ratios;  // trial 0 is the point mass at 0
  double grid_error_bound = 0.0;
};

/// ||Cf||_2 / ||f||_2 over trials: trial 0 is delta_0, the rest are seeded random
/// complex f on [-radius, radius]^n with uniform real and imaginary parts in [-1, 1].
NormRatioStats norm_ratio_stats(const KernelFamily& fam, int J, const LambdaGrid& grid,
                                int trials, std::int64_t radius, std::uint64_t seed);

/// Deterministic random lattice function used by norm_ratio_stats trials.
LatticeFunction random_lattice_function(int n, std::int64_t radius, std::uint64_t seed);

/// Largest singular value of f -> apply_mj(f) on functions supported in
/// [-radius, radius]^n, by power iteration on T*T.
double fixed_lambda_norm(const KernelFamily& fam, int j, double lambda, std::int64_t radius,
                         int iterations = 200, std::uint64_t seed = 1);

using LambdaMap = std::function<double(std::span<const std::int64_t>)>;

/// TT* kernel sum_z e(lambda(x)|z|^(2d) - lambda(y)|y-x+z|^(2d)) K_j(z) conj(K_j(y-x+z)) 1_{|x-z| <= 2^j}.
cplx tts_kernel(const KernelFamily& fam, int j, const LambdaMap& lambda,
                std::span<const std::int64_t> x, std::span<const std::int64_t> y);

struct KappaForms {
  cplx beta_form;
  cplx u_form;
  double discrepancy() const { return std::abs(beta_form - u_form); }
};

/// Both algebraic forms of kappa for alpha = a/q = alpha(y), alpha' = a'/q' = alpha(x)
/// and w = y - x, without restricting q, q' to a dyadic block.
KappaForms kappa_forms(const ReducedRational& alpha, const ReducedRational& alpha_prime,
                       std::span<const std::int64_t> w, int d,
                       std::uint64_t budget = 1'000'000'000);

/// kappa_{s,alpha}: checks q, q' in [2^(s-1), 2^s) and gcd conditions, then kappa_forms.
KappaForms kappa(int s, const ReducedRational& alpha, const ReducedRational& alpha_prime,
                 std::span<const std::int64_t> w, int d, int n);

/// q^-n sum_{r in [q]^n} e(a|r|^(2d)/q - a'|r + w|^(2d)/q').
cplx s_xy(std::int64_t a, std::int64_t q, std::int64_t a_prime, std::int64_t q_prime,
          std::span<const std::int64_t> w, int d, std::uint64_t budget = 1'000'000'000);

using KernelHandle = std::function<cplx(std::span<const std::int64_t>, std::span<const std::int64_t>)>;

/// max over rows x of sum over columns y of |K(x, y)|.
double schur_bound(const KernelHandle& kernel, std::span<const std::vector<std::int64_t>> rows,
                   std::span<const std::vector<std::int64_t>> cols);

struct RmBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Dyadic chaining bound for a sequence of length 2^s + 1.
RmBound rm_bound(std::span<const cplx> a, std::size_t j0);

/// N^(1/2) A + (2 N A B delta)^(1/2).
double sobolev_maximal_bound(double N, double A, double B, double delta);

}  // namespace dcl
