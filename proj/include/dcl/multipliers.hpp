#pragma once

// Lattice multipliers m_{j,lambda}(xi) = sum_y e(lambda|y|^(2d) + xi.y) K_j(y),
// their circle-method approximation by arc pieces, and the periodic
// multipliers built from the cutoffs chi_s and chi~_s.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcl/kernels.hpp"
#include "dcl/numeric.hpp"
#include "dcl/oscint.hpp"
#include "dcl/rationals.hpp"

namespace dcl {

/// m_{j,lambda}(k/N) on the uniform grid k in [N]^n, row-major.
struct MultiplierGrid {
  int n = 1;
  std::int64_t N = 0;
  int j = 1;
  double lambda = 0.0;
  std::string kind = "m";
  std::vector<cplx> values;

  std::size_t index(std::span<const std::int64_t> k) const;
  const cplx& at(std::span<const std::int64_t> k) const { return values[index(k)]; }
};

/// m_{j,lambda}(xi) by direct lexicographic summation over the support of K_j.
/// Phases lambda|y|^(2d) and xi.y are reduced mod 1 in exact integer arithmetic.
cplx m_lattice(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
               std::uint64_t budget = 50'000'000);

/// m_{j,a/q+nu}(b/q+eta) with the rational part of the phase taken exactly mod q.
cplx m_lattice_arc(const KernelFamily& fam, int j, const ArcPair& pair, long double nu,
                   std::span<const double> eta, std::uint64_t budget = 50'000'000);

/// Whole grid by one n-dimensional FFT of the modulated kernel. N must be a
/// power of two with N >= 2^(j+3).
MultiplierGrid m_grid(const KernelFamily& fam, int j, double lambda, std::int64_t N,
                      std::uint64_t budget = 1ull << 28);

struct ApproxResult {
  cplx err;             // m - S Phi
  double bound_ratio = 0.0;  // |err| / (q delta)
  double delta = 0.0;
  cplx m;
  cplx main_term;       // S(a/q, b/q) Phi_{j, lambda - a/q}(xi - b/q)
  double quad_error = 0.0;
};

/// Smallest admissible delta = max(|nu| 2^((2d-1)j), |eta|, 2^-j) for the
/// nearest translates nu, eta of lambda - a/q and xi - b/q.
double approx_delta(int j, int d, const ArcPair& pair, double lambda, std::span<const double> xi);

/// Approximation error at one point. DomainError unless q <= 2^(j-2) and delta < 1.
ApproxResult approx_error(const KernelFamily& fam, int j, const ArcPair& pair, double lambda,
                          std::span<const double> xi, const QuadratureSpec& quad = {});

/// Smooth radial cutoffs chi (1 on |xi| <= sqrt(n)/4, 0 beyond 1/2) and
/// chi~ (1 on |xi| <= plateau, 0 beyond support), dilated by 2^(c s).
struct CutoffSpec {
  int scale_exponent = 10;
  double tilde_plateau = 0.5;
  double tilde_support = 1.0;

  /// Throws ConfigError unless the profiles are well formed for dimension n.
  void validate(int n) const;
  /// chi~ == 1 on supp chi, the condition the factorization relies on.
  bool nested() const { return tilde_plateau >= 0.5; }

  double chi(std::span<const double> xi) const;
  double chi_tilde(std::span<const double> xi) const;
  double chi_s(int s, std::span<const double> xi) const;
  double chi_tilde_s(int s, std::span<const double> xi) const;
  /// Support radii 2^(-cs)/2 and 2^(-cs) tilde_support.
  double chi_s_radius(int s) const;
  double chi_tilde_s_radius(int s) const;
};

/// One (alpha, beta) in R_s whose windows contain (lambda, xi): S(alpha, beta) != 0,
/// |lambda - alpha| <= 2^(-2dj + eps1 j) and chi_s(xi - beta) > 0.
struct ArcTerm {
  ArcPair pair;
  int s = 0;
  long double nu = 0.0L;      // lambda - alpha, nearest translate
  std::vector<double> eta;    // xi - beta, nearest translate
  double chi = 0.0;
};

/// Window lookup of the contributing terms of L^s_{j,lambda}(xi); Phi* is not evaluated.
std::vector<ArcTerm> arc_terms(int s, int j, double lambda, std::span<const double> xi,
                               const ArcParams& params, const CutoffSpec& cut);

struct LResult {
  cplx value;
  std::size_t terms = 0;
  double quad_error = 0.0;
};

/// L^s_{j,lambda}(xi) = sum_{R_s} S Phi*_{j,lambda-alpha}(xi-beta) chi_s(xi-beta). Requires s <= eps1 j.
LResult L_sj(const KernelFamily& fam, int s, int j, double lambda, std::span<const double> xi,
             const ArcParams& params, const CutoffSpec& cut, const QuadratureSpec& quad = {});

struct EResult {
  cplx value;
  cplx m;           // m_{j,lambda}(xi) 1_{X_j}(lambda)
  cplx L;           // sum over s <= eps1 j of L^s
  bool in_Xj = false;
  std::size_t terms = 0;
  double quad_error = 0.0;
};

/// E_{j,lambda}(xi) = m_{j,lambda}(xi) 1_{X_j}(lambda) - sum_{1 <= s <= eps1 j} L^s_{j,lambda}(xi).
EResult E_j(const KernelFamily& fam, int j, double lambda, std::span<const double> xi,
            const ArcParams& params, const CutoffSpec& cut, const QuadratureSpec& quad = {});

/// E_{j,lambda}(k/N) for every k in [N]^n, from m_grid plus L at the grid
/// points inside some chi_s support.
std::vector<cplx> E_grid(const KernelFamily& fam, int j, double lambda, std::int64_t N,
                         const ArcParams& params, const CutoffSpec& cut,
                         const QuadratureSpec& quad = {}, double* quad_error = nullptr);

/// Multiplier handle evaluated at an offset xi - beta.
using Multiplier = std::function<cplx(std::span<const double>)>;

struct ScriptLResult {
  cplx value;
  std::size_t terms = 0;  // betas with a nonzero cutoff factor
};

/// sum_{beta in B_s(alpha)} S(alpha, beta) m(xi - beta) chi_s(xi - beta). B_s(alpha)
/// is found by window lookup: only the nearest b/q for each q can meet supp chi_s.
ScriptLResult script_L(int s, const ReducedRational& alpha, const Multiplier& m,
                       std::span<const double> xi, const CutoffSpec& cut, int d = 1);

/// sum_{beta in B#_s} m(xi - beta) chi~_s(xi - beta), B#_s = {b/q : q in [2^(s-1), 2^s)}.
ScriptLResult script_L_sharp(int s, const Multiplier& m, std::span<const double> xi,
                             const CutoffSpec& cut);

}  // namespace dcl
