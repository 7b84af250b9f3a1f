#pragma once

// Calderon-Zygmund kernels K(x) = Omega(x)/|x|^n and their smooth dyadic
// pieces K_j = psi_j K (j >= 2), K_1 = eta(|x|/2) K.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcl/numeric.hpp"

namespace dcl {

/// exp(-1/t) transition: 0 for t <= 0, 1 for t >= 1, smooth and monotone.
double smooth_step(double t);

/// Radial cutoff equal to 1 on [0, inner], 0 on [outer, inf), monotone between.
double radial_cutoff(double r, double inner, double outer);

/// eta(r) = radial_cutoff(r, 1, 2).
double eta(double r);

/// psi(r) = eta(r) - eta(2r), supported in [1/2, 2]; sum_j psi(2^-j r) = 1 for r > 0.
double psi(double r);

/// psi(2^-j r).
double psi_j(int j, double r);

enum class OmegaKind { Sign, Riesz, Harmonic };

/// Kernel specification: dimension n, angular profile Omega and degree d of the
/// modulating phase |y|^(2d).
struct KernelFamily {
  int n = 1;
  int d = 1;
  OmegaKind kind = OmegaKind::Sign;
  /// Riesz: coordinate index (0-based). Harmonic: order m >= 1.
  int index = 0;

  /// Throws ConfigError for inconsistent combinations.
  void validate() const;
  /// Omega(x) for x != 0 (value at 0 is 0).
  double omega(std::span<const double> x) const;
  /// K(x) = Omega(x)/|x|^n, 0 at the origin.
  double kernel(std::span<const double> x) const;
  std::string name() const;

  static KernelFamily sign(int d = 1);
  static KernelFamily riesz(int n, int coord, int d = 1);
  static KernelFamily harmonic(int m, int d = 1);
  /// "sign", "riesz", "harmonic"; param is the coordinate or order.
  static KernelFamily from_name(const std::string& name, int n, int d, int param);
};

/// Dyadic weight multiplying K: psi_j(r) for j >= 2, eta(r/2) for j = 1.
double dyadic_weight(int j, double r);

/// Outer radius 2^(j+1) of supp K_j; inner radius 2^(j-1) for j >= 2, 0 for j = 1.
double piece_outer_radius(int j);
double piece_inner_radius(int j);

/// K_j(x). Zero at x = 0 and for |x| > 2^(j+1). Throws DomainError for j < 1.
cplx kernel_piece(const KernelFamily& fam, int j, std::span<const double> x);

/// Real-valued K_j(x) for integer points.
double kernel_piece_at(const KernelFamily& fam, int j, std::span<const std::int64_t> y);

struct KernelBounds {
  double A0 = 0.0;  // max 2^(jn) |K_j(x)|
  double A1 = 0.0;  // max 2^(j(n+1)) |grad K_j(x)|
};

/// Sup estimates over j <= j_max from a deterministic stratified sample of
/// sample_count radii per scale (times a fixed set of directions). K_1 is
/// sampled on |x| >= 1 since it is singular at the origin.
KernelBounds verify_kernel_bounds(const KernelFamily& fam, int j_max, int sample_count);

struct LatticeSample {
  std::vector<std::int64_t> y;
  double value = 0.0;
};

/// All nonzero K_j(y), y in Z^n \ {0}, |y| <= 2^(j+1), in lexicographic order.
std::vector<LatticeSample> lattice_kernel_samples(const KernelFamily& fam, int j,
                                                  std::uint64_t budget = 50'000'000);

/// K_j on the box [-2^(j+1), 2^(j+1)]^n, row-major (first axis slowest).
std::vector<double> kernel_box(const KernelFamily& fam, int j, std::uint64_t budget = 50'000'000);

/// sum_y |K_j(y)| over Z^n.
double kernel_l1(const KernelFamily& fam, int j);

}  // namespace dcl
