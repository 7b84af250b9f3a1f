#include "dcl/kernels.hpp"

#include <cmath>
#include <random>

#include "dcl/error.hpp"

namespace dcl {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::uint64_t box_size(int n, std::int64_t R, std::uint64_t budget) {
  long double size = 1.0L;
  for (int k = 0; k < n; ++k) size *= static_cast<long double>(2 * R + 1);
  if (size > static_cast<long double>(budget)) {
    throw BudgetError("kernel box of " + std::to_string(static_cast<double>(size)) +
                      " points exceeds the lattice budget");
  }
  return static_cast<std::uint64_t>(size);
}

// Fixed unit directions for gradient and sup sampling.
std::vector<std::vector<double>> sample_directions(int n) {
  std::vector<std::vector<double>> dirs;
  if (n == 1) return {{1.0}, {-1.0}};
  if (n == 2) {
    constexpr int count = 64;
    for (int k = 0; k < count; ++k) {
      const double t = kTwoPi * (k + 0.5) / count;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  std::mt19937_64 rng(0x5eedu);
  std::normal_distribution<double> g;
  for (int k = 0; k < 256; ++k) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& c : v) c = g(rng);
    const double len = std::sqrt(norm2(v));
    for (auto& c : v) c /= len;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double f = std::exp(-1.0 / t);
  const double g = std::exp(-1.0 / (1.0 - t));
  return f / (f + g);
}

double radial_cutoff(double r, double inner, double outer) {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  return smooth_step((outer - r) / (outer - inner));
}

double eta(double r) { return radial_cutoff(r, 1.0, 2.0); }

double psi(double r) { return eta(r) - eta(2.0 * r); }

double psi_j(int j, double r) { return psi(std::ldexp(r, -j)); }

void KernelFamily::validate() const {
  if (n < 1) throw ConfigError("kernel: n must be positive");
  if (d < 1) throw ConfigError("kernel: d must be positive");
  switch (kind) {
    case OmegaKind::Sign:
      if (n != 1) throw ConfigError("kernel: sign profile requires n = 1");
      break;
    case OmegaKind::Riesz:
      if (index < 0 || index >= n) throw ConfigError("kernel: Riesz coordinate out of range");
      break;
    case OmegaKind::Harmonic:
      if (n != 2) throw ConfigError("kernel: harmonic profile requires n = 2");
      if (index < 1) throw ConfigError("kernel: harmonic order must be at least 1");
      break;
  }
}

double KernelFamily::omega(std::span<const double> x) const {
  const double r2 = norm2(x);
  if (r2 == 0.0) return 0.0;
  switch (kind) {
    case OmegaKind::Sign:
      return x[0] > 0.0 ? 1.0 : -1.0;
    case OmegaKind::Riesz:
      return x[static_cast<std::size_t>(index)] / std::sqrt(r2);
    case OmegaKind::Harmonic:
      return std::cos(index * std::atan2(x[1], x[0]));
  }
  return 0.0;
}

double KernelFamily::kernel(std::span<const double> x) const {
  const double r2 = norm2(x);
  if (r2 == 0.0) return 0.0;
  return omega(x) / std::pow(std::sqrt(r2), n);
}

std::string KernelFamily::name() const {
  switch (kind) {
    case OmegaKind::Sign:
      return "sign";
    case OmegaKind::Riesz:
      return "riesz" + std::to_string(index);
    case OmegaKind::Harmonic:
      return "harmonic" + std::to_string(index);
  }
  return "?";
}

KernelFamily KernelFamily::sign(int d) { return {1, d, OmegaKind::Sign, 0}; }
KernelFamily KernelFamily::riesz(int n, int coord, int d) { return {n, d, OmegaKind::Riesz, coord}; }
KernelFamily KernelFamily::harmonic(int m, int d) { return {2, d, OmegaKind::Harmonic, m}; }

KernelFamily KernelFamily::from_name(const std::string& name, int n, int d, int param) {
  KernelFamily fam;
  if (name == "sign") {
    fam = sign(d);
    if (n != 1) throw ConfigError("kernel: sign profile requires n = 1");
  } else if (name == "riesz") {
    fam = riesz(n, param, d);
  } else if (name == "harmonic") {
    fam = harmonic(param, d);
    if (n != 2) throw ConfigError("kernel: harmonic profile requires n = 2");
  } else {
    throw ConfigError("unknown kernel '" + name + "'");
  }
  fam.validate();
  return fam;
}

double dyadic_weight(int j, double r) {
  if (j < 1) throw DomainError("kernel piece: j must be positive");
  return j == 1 ? eta(0.5 * r) : psi_j(j, r);
}

double piece_outer_radius(int j) { return std::ldexp(1.0, j + 1); }
double piece_inner_radius(int j) { return j == 1 ? 0.0 : std::ldexp(1.0, j - 1); }

cplx kernel_piece(const KernelFamily& fam, int j, std::span<const double> x) {
  if (j < 1) throw DomainError("kernel piece: j must be positive");
  const double r = std::sqrt(norm2(x));
  if (r == 0.0 || r > piece_outer_radius(j)) return {0.0, 0.0};
  const double w = dyadic_weight(j, r);
  if (w == 0.0) return {0.0, 0.0};
  return {w * fam.kernel(x), 0.0};
}

double kernel_piece_at(const KernelFamily& fam, int j, std::span<const std::int64_t> y) {
  double buf[8];
  std::vector<double> heap;
  double* x = buf;
  if (y.size() > 8) {
    heap.resize(y.size());
    x = heap.data();
  }
  for (std::size_t k = 0; k < y.size(); ++k) x[k] = static_cast<double>(y[k]);
  return kernel_piece(fam, j, std::span<const double>(x, y.size())).real();
}

KernelBounds verify_kernel_bounds(const KernelFamily& fam, int j_max, int sample_count) {
  if (j_max < 1) throw DomainError("verify_kernel_bounds: j_max must be positive");
  if (sample_count < 1) throw DomainError("verify_kernel_bounds: sample_count must be positive");
  fam.validate();
  const auto dirs = sample_directions(fam.n);
  const auto n = static_cast<std::size_t>(fam.n);
  KernelBounds out;
  std::vector<double> x(n), xp(n), xm(n);
  for (int j = 1; j <= j_max; ++j) {
    const double lo = j == 1 ? 1.0 : piece_inner_radius(j);
    const double hi = piece_outer_radius(j);
    const double h = std::ldexp(1e-6, j);
    const double s0 = std::ldexp(1.0, j * fam.n);
    const double s1 = std::ldexp(1.0, j * (fam.n + 1));
    for (int i = 0; i < sample_count; ++i) {
      const double r = lo + (hi - lo) * (i + 0.5) / sample_count;
      for (const auto& u : dirs) {
        for (std::size_t k = 0; k < n; ++k) x[k] = r * u[k];
        out.A0 = std::max(out.A0, s0 * std::abs(kernel_piece(fam, j, x)));
        double g2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          xp = x;
          xm = x;
          xp[k] += h;
          xm[k] -= h;
          const double dk = (kernel_piece(fam, j, xp).real() - kernel_piece(fam, j, xm).real()) / (2.0 * h);
          g2 += dk * dk;
        }
        out.A1 = std::max(out.A1, s1 * std::sqrt(g2));
      }
    }
  }
  return out;
}

std::vector<double> kernel_box(const KernelFamily& fam, int j, std::uint64_t budget) {
  if (j < 1) throw DomainError("kernel piece: j must be positive");
  const auto R = static_cast<std::int64_t>(piece_outer_radius(j));
  const std::uint64_t size = box_size(fam.n, R, budget);
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<double> out(size);
  std::vector<std::int64_t> y(n, -R);
  for (std::uint64_t idx = 0; idx < size; ++idx) {
    out[idx] = kernel_piece_at(fam, j, y);
    for (std::size_t k = n; k-- > 0;) {
      if (++y[k] <= R) break;
      y[k] = -R;
    }
  }
  return out;
}

std::vector<LatticeSample> lattice_kernel_samples(const KernelFamily& fam, int j,
                                                  std::uint64_t budget) {
  const auto R = static_cast<std::int64_t>(piece_outer_radius(j));
  const auto box = kernel_box(fam, j, budget);
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<LatticeSample> out;
  std::vector<std::int64_t> y(n, -R);
  for (double v : box) {
    if (v != 0.0) out.push_back({y, v});
    for (std::size_t k = n; k-- > 0;) {
      if (++y[k] <= R) break;
      y[k] = -R;
    }
  }
  return out;
}

double kernel_l1(const KernelFamily& fam, int j) {
  double s = 0.0;
  for (double v : kernel_box(fam, j)) s += std::abs(v);
  return s;
}

}  // namespace dcl
