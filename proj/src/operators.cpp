#include "dcl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "dcl/error.hpp"
#include "dcl/expsums.hpp"
#include "dcl/fft.hpp"
#include "dcl/parallel.hpp"

namespace dcl {

namespace {

std::int64_t norm_sq(std::span<const std::int64_t> v) {
  std::int64_t s = 0;
  for (auto c : v) s += c * c;
  return s;
}

std::int64_t ipow(std::int64_t base, int e) {
  __int128 p = 1;
  for (int k = 0; k < e; ++k) {
    p *= base;
    if (p > INT64_MAX) throw OverflowError("|y|^(2d) exceeds 64 bits");
  }
  return static_cast<std::int64_t>(p);
}

// Dense kernel on [-R, R]^n with R = 2^(j_hi+1): the sum of K_j for j_lo <= j <= j_hi.
struct KernelStencil {
  int n = 1;
  std::int64_t R = 0;
  std::vector<double> values;          // row-major over [-R, R]^n
  std::vector<std::int64_t> norm_pow;  // |y|^(2d) at the same points
};

KernelStencil make_stencil(const KernelFamily& fam, int j_lo, int j_hi, std::uint64_t budget) {
  if (j_lo < 1 || j_hi < j_lo) throw DomainError("kernel stencil: bad scale range");
  KernelStencil st;
  st.n = fam.n;
  st.R = static_cast<std::int64_t>(piece_outer_radius(j_hi));
  const std::int64_t W = 2 * st.R + 1;
  long double size = 1.0L;
  for (int k = 0; k < fam.n; ++k) size *= static_cast<long double>(W);
  if (size > static_cast<long double>(budget)) throw BudgetError("kernel stencil exceeds the lattice budget");
  st.values.assign(static_cast<std::size_t>(size), 0.0);
  st.norm_pow.resize(st.values.size());
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<std::int64_t> y(n, -st.R);
  for (std::size_t idx = 0; idx < st.values.size(); ++idx) {
    double v = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) v += kernel_piece_at(fam, j, y);
    st.values[idx] = v;
    st.norm_pow[idx] = ipow(norm_sq(y), fam.d);
    for (std::size_t k = n; k-- > 0;) {
      if (++y[k] <= st.R) break;
      y[k] = -st.R;
    }
  }
  return st;
}

// Padded transform geometry for convolving a function on box (lo, shape)
// with a stencil of half-width R.
struct ConvGeometry {
  int n = 1;
  std::vector<int> pad;                 // per-axis transform length
  std::vector<std::int64_t> in_lo, in_shape;
  std::vector<std::int64_t> out_lo, out_shape;
  std::int64_t R = 0;
  std::size_t total = 1;

  ConvGeometry(const LatticeFunction& f, std::int64_t radius, std::uint64_t budget)
      : n(f.n), in_lo(f.lo), in_shape(f.shape), R(radius) {
    long double t = 1.0L;
    for (int k = 0; k < n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const std::size_t p = next_pow2(static_cast<std::size_t>(in_shape[ks] + 2 * R + 1));
      pad.push_back(static_cast<int>(p));
      out_lo.push_back(in_lo[ks] - R);
      out_shape.push_back(in_shape[ks] + 2 * R);
      t *= static_cast<long double>(p);
    }
    if (t > static_cast<long double>(budget)) {
      throw BudgetError("convolution transform of " + std::to_string(static_cast<double>(t)) +
                        " points exceeds the lattice budget");
    }
    total = static_cast<std::size_t>(t);
  }

  std::size_t pad_index(std::span<const std::int64_t> offset) const {
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      idx = idx * static_cast<std::size_t>(pad[ks]) + static_cast<std::size_t>(floor_mod(offset[ks], pad[ks]));
    }
    return idx;
  }

  AlignedBuffer transform_input(const LatticeFunction& f) const {
    AlignedBuffer buf(total);
    std::vector<std::int64_t> off(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const auto x = f.point(i);
      for (int k = 0; k < n; ++k) off[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - in_lo[static_cast<std::size_t>(k)];
      buf[pad_index(off)] = f.values[i];
    }
    fft_inplace(buf, pad, FftDirection::Forward);
    return buf;
  }

  // Transform of h(y) = stencil(y) e(lambda |y|^(2d)), optionally conjugate-reflected.
  AlignedBuffer transform_kernel(const KernelStencil& st, double lambda, bool adjoint) const {
    AlignedBuffer buf(total);
    const auto nn = static_cast<std::size_t>(n);
    std::vector<std::int64_t> y(nn, -st.R), off(nn);
    for (std::size_t idx = 0; idx < st.values.size(); ++idx) {
      if (st.values[idx] != 0.0) {
        cplx h = st.values[idx] * expi(frac_mul(lambda, st.norm_pow[idx]));
        for (std::size_t k = 0; k < nn; ++k) off[k] = adjoint ? -y[k] : y[k];
        if (adjoint) h = std::conj(h);
        buf[pad_index(off)] = h;
      }
      for (std::size_t k = nn; k-- > 0;) {
        if (++y[k] <= st.R) break;
        y[k] = -st.R;
      }
    }
    fft_inplace(buf, pad, FftDirection::Forward);
    return buf;
  }

  LatticeFunction empty_output() const {
    LatticeFunction g;
    g.n = n;
    g.lo = out_lo;
    g.shape = out_shape;
    std::size_t s = 1;
    for (auto e : out_shape) s *= static_cast<std::size_t>(e);
    g.values.assign(s, cplx{});
    return g;
  }

  // Flat output index -> padded index, fixed for the geometry.
  std::vector<std::size_t> output_map(const LatticeFunction& g) const {
    std::vector<std::size_t> map(g.values.size());
    std::vector<std::int64_t> off(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      const auto x = g.point(i);
      for (int k = 0; k < n; ++k) off[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - in_lo[static_cast<std::size_t>(k)];
      map[i] = pad_index(off);
    }
    return map;
  }
};

LatticeFunction convolve(const KernelStencil& st, double lambda, const LatticeFunction& f,
                         bool adjoint, std::uint64_t budget) {
  f.check();
  if (f.n != st.n) throw DomainError("convolution: dimension mismatch");
  const ConvGeometry geo(f, st.R, budget);
  AlignedBuffer F = geo.transform_input(f);
  const AlignedBuffer H = geo.transform_kernel(st, lambda, adjoint);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= H[i];
  fft_inplace(F, geo.pad, FftDirection::Backward);
  auto g = geo.empty_output();
  const auto map = geo.output_map(g);
  const double scale = 1.0 / static_cast<double>(geo.total);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = F[map[i]] * scale;
  return g;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

double lipschitz_from_stencil(const KernelFamily& fam, int J, double f_linf) {
  double l1 = 0.0;
  for (int j = 1; j <= J; ++j) l1 += kernel_l1(fam, j);
  const double rmax = piece_outer_radius(J);
  return kTwoPi * std::pow(rmax, 2.0 * fam.d) * l1 * f_linf;
}

}  // namespace

LatticeFunction LatticeFunction::box(int n, std::int64_t half_width, std::int64_t center) {
  if (n < 1 || half_width < 0) throw DomainError("LatticeFunction: bad box");
  LatticeFunction f;
  f.n = n;
  f.lo.assign(static_cast<std::size_t>(n), center - half_width);
  f.shape.assign(static_cast<std::size_t>(n), 2 * half_width + 1);
  std::size_t s = 1;
  for (auto e : f.shape) s *= static_cast<std::size_t>(e);
  f.values.assign(s, cplx{});
  return f;
}

LatticeFunction LatticeFunction::delta(std::span<const std::int64_t> x) {
  LatticeFunction f;
  f.n = static_cast<int>(x.size());
  f.lo.assign(x.begin(), x.end());
  f.shape.assign(x.size(), 1);
  f.values.assign(1, cplx{1.0, 0.0});
  return f;
}

bool LatticeFunction::contains(std::span<const std::int64_t> x) const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (x[k] < lo[k] || x[k] >= lo[k] + shape[k]) return false;
  }
  return true;
}

cplx LatticeFunction::at(std::span<const std::int64_t> x) const {
  if (!contains(x)) return {};
  std::size_t idx = 0;
  for (std::size_t k = 0; k < lo.size(); ++k) idx = idx * static_cast<std::size_t>(shape[k]) + static_cast<std::size_t>(x[k] - lo[k]);
  return values[idx];
}

cplx& LatticeFunction::ref(std::span<const std::int64_t> x) {
  if (!contains(x)) throw DomainError("LatticeFunction: point outside the support box");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < lo.size(); ++k) idx = idx * static_cast<std::size_t>(shape[k]) + static_cast<std::size_t>(x[k] - lo[k]);
  return values[idx];
}

std::vector<std::int64_t> LatticeFunction::point(std::size_t idx) const {
  std::vector<std::int64_t> x(lo.size());
  for (std::size_t k = lo.size(); k-- > 0;) {
    const auto e = static_cast<std::size_t>(shape[k]);
    x[k] = lo[k] + static_cast<std::int64_t>(idx % e);
    idx /= e;
  }
  return x;
}

double LatticeFunction::l2() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  return std::sqrt(s);
}

double LatticeFunction::l1() const {
  double s = 0.0;
  for (const auto& v : values) s += std::abs(v);
  return s;
}

double LatticeFunction::linf() const {
  double s = 0.0;
  for (const auto& v : values) s = std::max(s, std::abs(v));
  return s;
}

void LatticeFunction::check() const {
  if (n < 1 || lo.size() != static_cast<std::size_t>(n) || shape.size() != static_cast<std::size_t>(n)) {
    throw DomainError("LatticeFunction: box rank differs from n");
  }
  std::size_t s = 1;
  for (auto e : shape) {
    if (e < 1) throw DomainError("LatticeFunction: empty box");
    s *= static_cast<std::size_t>(e);
  }
  if (s != values.size()) throw DomainError("LatticeFunction: value count differs from the box");
}

LatticeFunction apply_mj(const KernelFamily& fam, int j, double lambda, const LatticeFunction& f,
                         std::uint64_t budget) {
  return convolve(make_stencil(fam, j, j, budget), lambda, f, false, budget);
}

LatticeFunction apply_scales(const KernelFamily& fam, int j_lo, int j_hi, double lambda,
                             const LatticeFunction& f, std::uint64_t budget) {
  return convolve(make_stencil(fam, j_lo, j_hi, budget), lambda, f, false, budget);
}

LatticeFunction apply_mj_adjoint(const KernelFamily& fam, int j, double lambda,
                                 const LatticeFunction& g, std::uint64_t budget) {
  return convolve(make_stencil(fam, j, j, budget), lambda, g, true, budget);
}

LambdaGrid::LambdaGrid(std::int64_t M) : M_(M) {
  if (M < 1) throw DomainError("LambdaGrid: M must be positive");
  values_.resize(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i) {
    values_[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(M);
  }
}

LambdaGrid& LambdaGrid::refine_near_rationals(std::int64_t refine_q, int points, double width) {
  if (refine_q < 1 || points < 1 || !(width > 0.0)) throw DomainError("LambdaGrid: bad refinement");
  for (const auto& r : farey_set(refine_q)) {
    for (int k = 0; k < points; ++k) {
      const double t = points == 1 ? 0.0 : -width + 2.0 * width * k / (points - 1);
      double v = r.value() + t;
      v -= std::floor(v);
      values_.push_back(v);
    }
  }
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
  return *this;
}

LambdaGrid LambdaGrid::refined(std::int64_t factor) const {
  if (factor < 1) throw DomainError("LambdaGrid: refinement factor must be positive");
  LambdaGrid g(M_ * factor);
  g.values_.insert(g.values_.end(), values_.begin(), values_.end());
  std::sort(g.values_.begin(), g.values_.end());
  g.values_.erase(std::unique(g.values_.begin(), g.values_.end()), g.values_.end());
  return g;
}

double LambdaGrid::max_spacing() const {
  double gap = 1.0 - values_.back() + values_.front();
  for (std::size_t i = 1; i < values_.size(); ++i) gap = std::max(gap, values_[i] - values_[i - 1]);
  return gap;
}

double carleson_lambda_lipschitz(const KernelFamily& fam, int J, double f_linf) {
  return lipschitz_from_stencil(fam, J, f_linf);
}

namespace {

// Running max of |T_lambda f_t| over a contiguous block of grid values, for
// every trial t. argmax keeps the first maximizing index.
struct MaxState {
  std::vector<std::vector<double>> best;
  std::vector<std::vector<std::int64_t>> arg;
};

MaxState sweep_block(const ConvGeometry& geo, const KernelStencil& st, const std::vector<double>& lambdas,
                     std::size_t lo, std::size_t hi, const std::vector<AlignedBuffer>& F,
                     const std::vector<std::size_t>& map) {
  MaxState state;
  state.best.assign(F.size(), std::vector<double>(map.size(), -1.0));
  state.arg.assign(F.size(), std::vector<std::int64_t>(map.size(), -1));
  AlignedBuffer work(geo.total);
  const double scale = 1.0 / static_cast<double>(geo.total);
  for (std::size_t li = lo; li < hi; ++li) {
    const AlignedBuffer H = geo.transform_kernel(st, lambdas[li], false);
    for (std::size_t t = 0; t < F.size(); ++t) {
      for (std::size_t i = 0; i < work.size(); ++i) work[i] = F[t][i] * H[i];
      fft_inplace(work, geo.pad, FftDirection::Backward);
      auto& best = state.best[t];
      auto& arg = state.arg[t];
      for (std::size_t i = 0; i < map.size(); ++i) {
        const double v = std::abs(work[map[i]]) * scale;
        if (v > best[i]) {
          best[i] = v;
          arg[i] = static_cast<std::int64_t>(li);
        }
      }
    }
  }
  return state;
}

MaxState sweep_all(const ConvGeometry& geo, const KernelStencil& st, const std::vector<double>& lambdas,
                   const std::vector<AlignedBuffer>& F, const std::vector<std::size_t>& map) {
  const std::size_t M = lambdas.size();
  const std::size_t W = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), M));
  const std::size_t chunk = (M + W - 1) / W;
  std::vector<MaxState> parts(W);
  parallel_for(W, [&](std::size_t w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(M, lo + chunk);
    if (lo < hi) parts[w] = sweep_block(geo, st, lambdas, lo, hi, F, map);
  });
  // Merge in block order with strict comparison: ties keep the smaller index.
  MaxState total = std::move(parts[0]);
  for (std::size_t w = 1; w < W; ++w) {
    if (parts[w].best.empty()) continue;
    for (std::size_t t = 0; t < F.size(); ++t) {
      for (std::size_t i = 0; i < map.size(); ++i) {
        if (parts[w].best[t][i] > total.best[t][i]) {
          total.best[t][i] = parts[w].best[t][i];
          total.arg[t][i] = parts[w].arg[t][i];
        }
      }
    }
  }
  return total;
}

}  // namespace

CarlesonResult carleson_apply(const KernelFamily& fam, const LatticeFunction& f, int J,
                              const LambdaGrid& grid) {
  f.check();
  const std::uint64_t budget = 1ull << 26;
  const KernelStencil st = make_stencil(fam, 1, J, budget);
  const ConvGeometry geo(f, st.R, budget);
  std::vector<AlignedBuffer> F;
  F.push_back(geo.transform_input(f));
  CarlesonResult out;
  out.Cf = geo.empty_output();
  const auto map = geo.output_map(out.Cf);
  const auto state = sweep_all(geo, st, grid.values(), F, map);
  out.argmax_lambda.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    out.Cf.values[i] = state.best[0][i];
    out.argmax_lambda[i] = grid.values()[static_cast<std::size_t>(state.arg[0][i])];
  }
  out.grid_error_bound = lipschitz_from_stencil(fam, J, f.linf()) * grid.max_spacing() / 2.0;
  return out;
}

LatticeFunction random_lattice_function(int n, std::int64_t radius, std::uint64_t seed) {
  auto f = LatticeFunction::box(n, radius);
  std::mt19937_64 rng(splitmix(seed));
  for (auto& v : f.values) {
    const double re = 2.0 * unit_uniform(rng) - 1.0;
    const double im = 2.0 * unit_uniform(rng) - 1.0;
    v = {re, im};
  }
  return f;
}

NormRatioStats norm_ratio_stats(const KernelFamily& fam, int J, const LambdaGrid& grid,
                                int trials, std::int64_t radius, std::uint64_t seed) {
  if (trials < 1) throw DomainError("norm_ratio_stats: trials must be positive");
  const std::uint64_t budget = 1ull << 26;
  const KernelStencil st = make_stencil(fam, 1, J, budget);
  std::vector<LatticeFunction> fs;
  fs.reserve(static_cast<std::size_t>(trials));
  auto d0 = LatticeFunction::box(fam.n, radius);
  d0.ref(std::vector<std::int64_t>(static_cast<std::size_t>(fam.n), 0)) = 1.0;
  fs.push_back(std::move(d0));
  for (int t = 1; t < trials; ++t) {
    fs.push_back(random_lattice_function(fam.n, radius, seed * 0x100000001b3ull + static_cast<std::uint64_t>(t)));
  }
  const ConvGeometry geo(fs[0], st.R, budget);
  std::vector<AlignedBuffer> F;
  for (const auto& f : fs) F.push_back(geo.transform_input(f));
  const auto out = geo.empty_output();
  const auto map = geo.output_map(out);
  const auto state = sweep_all(geo, st, grid.values(), F, map);
  NormRatioStats stats;
  double linf = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    double s = 0.0;
    for (double v : state.best[ts]) s += v * v;
    stats.ratios.push_back(std::sqrt(s) / fs[ts].l2());
    stats.max_ratio = std::max(stats.max_ratio, stats.ratios.back());
    linf = std::max(linf, fs[ts].linf() / fs[ts].l2());
  }
  // Bound on the ratio error from discretizing lambda, per unit ||f||_2.
  const double out_sites = static_cast<double>(map.size());
  stats.grid_error_bound =
      lipschitz_from_stencil(fam, J, linf) * grid.max_spacing() / 2.0 * std::sqrt(out_sites);
  return stats;
}

double fixed_lambda_norm(const KernelFamily& fam, int j, double lambda, std::int64_t radius,
                         int iterations, std::uint64_t seed) {
  const std::uint64_t budget = 1ull << 26;
  const KernelStencil st = make_stencil(fam, j, j, budget);
  auto v = random_lattice_function(fam.n, radius, seed);
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double nv = v.l2();
    if (nv == 0.0) return 0.0;
    for (auto& c : v.values) c /= nv;
    const auto Tv = convolve(st, lambda, v, false, budget);
    est = Tv.l2();
    const auto TTv = convolve(st, lambda, Tv, true, budget);
    for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = TTv.at(v.point(i));
  }
  return est;
}

cplx tts_kernel(const KernelFamily& fam, int j, const LambdaMap& lambda,
                std::span<const std::int64_t> x, std::span<const std::int64_t> y) {
  if (static_cast<int>(x.size()) != fam.n || static_cast<int>(y.size()) != fam.n) {
    throw DomainError("tts_kernel: dimension mismatch");
  }
  const std::int64_t lim = std::int64_t{1} << (j + 2);
  if (norm_sq(x) > lim * lim || norm_sq(y) > lim * lim) return {};
  const double lx = lambda(x);
  const double ly = lambda(y);
  const std::int64_t R = std::int64_t{1} << (j + 1);
  const std::int64_t Bj = std::int64_t{1} << j;
  const auto n = static_cast<std::size_t>(fam.n);
  std::vector<std::int64_t> z(n, -R), u(n), xz(n);
  CompensatedSum acc;
  while (true) {
    for (std::size_t k = 0; k < n; ++k) {
      u[k] = y[k] - x[k] + z[k];
      xz[k] = x[k] - z[k];
    }
    if (norm_sq(xz) <= Bj * Bj) {
      const double kz = kernel_piece_at(fam, j, z);
      if (kz != 0.0) {
        const double ku = kernel_piece_at(fam, j, u);
        if (ku != 0.0) {
          const long double ph = frac_mul(lx, ipow(norm_sq(z), fam.d)) - frac_mul(ly, ipow(norm_sq(u), fam.d));
          acc.add(kz * ku * expi(ph));
        }
      }
    }
    std::size_t k = n;
    while (k-- > 0) {
      if (++z[k] <= R) break;
      z[k] = -R;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return acc.value();
}

namespace {

using TableKey = std::tuple<std::int64_t, std::int64_t, int, int>;

const std::vector<cplx>& cached_table(std::int64_t a, std::int64_t q, int d, int n) {
  thread_local std::map<TableKey, std::vector<cplx>> cache;
  const TableKey key{a, q, d, n};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, weyl_sum_table(a, q, d, n)).first;
  return it->second;
}

// |v|^(2d) mod m for every v in [m]^n, row-major.
std::vector<std::int64_t> power_table(std::int64_t m, int d, int n) {
  std::size_t size = 1;
  for (int k = 0; k < n; ++k) size *= static_cast<std::size_t>(m);
  std::vector<std::int64_t> out(size);
  std::vector<std::int64_t> v(static_cast<std::size_t>(n), 0);
  for (std::size_t idx = 0; idx < size; ++idx) {
    out[idx] = norm_power_mod(v, d, m);
    for (int k = n - 1; k >= 0; --k) {
      if (++v[static_cast<std::size_t>(k)] < m) break;
      v[static_cast<std::size_t>(k)] = 0;
    }
  }
  return out;
}

std::size_t flat_mod(std::span<const std::int64_t> v, std::int64_t m) {
  std::size_t idx = 0;
  for (auto c : v) idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(floor_mod(c, m));
  return idx;
}

// sum over r in [q]^n and u in [U]^n of e(a|r|^(2d)/q - a'|r + w + u step|^(2d)/q'), unnormalized.
cplx paired_phase_sum(std::int64_t a, std::int64_t q, std::int64_t ap, std::int64_t qp,
                      std::span<const std::int64_t> w, std::int64_t U, std::int64_t step, int d,
                      std::uint64_t budget) {
  const int n = static_cast<int>(w.size());
  long double cost = 1.0L;
  for (int k = 0; k < n; ++k) cost *= static_cast<long double>(q) * static_cast<long double>(U);
  if (cost > static_cast<long double>(budget)) throw BudgetError("paired phase sum exceeds the term budget");
  const std::int64_t L = q * qp;
  if (L >= (std::int64_t{1} << 31)) throw OverflowError("paired phase sum: q q' too large");
  const UnitRoots roots(L);
  const auto Pq = power_table(q, d, n);
  const auto Pqp = power_table(qp, d, n);
  const auto ns = static_cast<std::size_t>(n);
  std::vector<std::int64_t> r(ns, 0), u(ns, 0), v(ns);
  CompensatedSum acc;
  std::size_t r_count = Pq.size();
  for (std::size_t ri = 0; ri < r_count; ++ri) {
    const std::int64_t base = (floor_mod(a, q) * qp % L) * Pq[ri] % L;
    std::fill(u.begin(), u.end(), 0);
    while (true) {
      for (std::size_t k = 0; k < ns; ++k) v[k] = r[k] + w[k] + u[k] * step;
      const std::int64_t second = (floor_mod(ap, qp) * q % L) * Pqp[flat_mod(v, qp)] % L;
      acc.add(roots[floor_mod(base - second, L)]);
      std::size_t k = ns;
      while (k-- > 0) {
        if (++u[k] < U) break;
        u[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    for (std::size_t k = ns; k-- > 0;) {
      if (++r[k] < q) break;
      r[k] = 0;
    }
  }
  return acc.value();
}

}  // namespace

KappaForms kappa_forms(const ReducedRational& alpha, const ReducedRational& alpha_prime,
                       std::span<const std::int64_t> w, int d, std::uint64_t budget) {
  const int n = static_cast<int>(w.size());
  if (n < 1 || d < 1) throw DomainError("kappa: n and d must be positive");
  const auto A = reduce(alpha.num, alpha.den);
  const auto Ap = reduce(alpha_prime.num, alpha_prime.den);
  const std::int64_t q = A.den, qp = Ap.den;
  const std::int64_t a = floor_mod(A.num, q), ap = floor_mod(Ap.num, qp);
  const std::int64_t qf = std::gcd(q, qp);
  KappaForms out;

  const auto& Sa = cached_table(a, q, d, n);
  const auto& Sap = cached_table(ap, qp, d, n);
  const UnitRoots roots_f(qf);
  const auto ns = static_cast<std::size_t>(n);
  std::vector<std::int64_t> b(ns, 0), bq(ns), bqp(ns);
  CompensatedSum beta_acc;
  while (true) {
    std::int64_t wb = 0;
    for (std::size_t k = 0; k < ns; ++k) {
      bq[k] = b[k] * (q / qf);
      bqp[k] = b[k] * (qp / qf);
      wb = (wb + floor_mod(w[k], qf) * b[k]) % qf;
    }
    beta_acc.add(Sa[flat_mod(bq, q)] * std::conj(Sap[flat_mod(bqp, qp)]) * roots_f[wb]);
    std::size_t k = ns;
    while (k-- > 0) {
      if (++b[k] < qf) break;
      b[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  out.beta_form = beta_acc.value();

  const std::int64_t U = qp / qf;
  const double norm = std::pow(static_cast<double>(U) * static_cast<double>(q), -n);
  out.u_form = paired_phase_sum(a, q, ap, qp, w, U, qf, d, budget) * norm;
  return out;
}

KappaForms kappa(int s, const ReducedRational& alpha, const ReducedRational& alpha_prime,
                 std::span<const std::int64_t> w, int d, int n) {
  if (s < 1) throw DomainError("kappa: s must be positive");
  if (static_cast<int>(w.size()) != n) throw DomainError("kappa: w has the wrong dimension");
  for (const auto* r : {&alpha, &alpha_prime}) {
    if (r->den < rs_q_lo(s) || r->den >= rs_q_hi(s)) {
      throw DomainError("kappa: denominator " + std::to_string(r->den) + " outside [2^(s-1), 2^s)");
    }
    if (std::gcd(r->num, r->den) != 1) throw DomainError("kappa: alpha must be reduced");
  }
  return kappa_forms(alpha, alpha_prime, w, d);
}

cplx s_xy(std::int64_t a, std::int64_t q, std::int64_t a_prime, std::int64_t q_prime,
          std::span<const std::int64_t> w, int d, std::uint64_t budget) {
  if (q < 1 || q_prime < 1) throw DomainError("s_xy: q and q' must be positive");
  const int n = static_cast<int>(w.size());
  return paired_phase_sum(a, q, a_prime, q_prime, w, 1, 0, d, budget) *
         std::pow(static_cast<double>(q), -n);
}

double schur_bound(const KernelHandle& kernel, std::span<const std::vector<std::int64_t>> rows,
                   std::span<const std::vector<std::int64_t>> cols) {
  double best = 0.0;
  for (const auto& x : rows) {
    double s = 0.0;
    for (const auto& y : cols) s += std::abs(kernel(x, y));
    best = std::max(best, s);
  }
  return best;
}

RmBound rm_bound(std::span<const cplx> a, std::size_t j0) {
  if (a.size() < 2) throw DomainError("rm_bound: length must be 2^s + 1");
  const std::size_t len = a.size() - 1;
  if ((len & (len - 1)) != 0) throw DomainError("rm_bound: length must be 2^s + 1");
  if (j0 > len) throw DomainError("rm_bound: j0 outside [0, 2^s]");
  int s = 0;
  while ((std::size_t{1} << s) < len) ++s;
  RmBound out;
  for (const auto& v : a) out.lhs = std::max(out.lhs, std::abs(v));
  double chain = 0.0;
  for (int l = 0; l <= s; ++l) {
    const std::size_t step = std::size_t{1} << l;
    double sq = 0.0;
    for (std::size_t k = 0; k < (std::size_t{1} << (s - l)); ++k) {
      sq += std::norm(a[(k + 1) * step] - a[k * step]);
    }
    chain += std::sqrt(sq);
  }
  out.rhs = std::abs(a[j0]) + std::sqrt(2.0) * chain;
  return out;
}

double sobolev_maximal_bound(double N, double A, double B, double delta) {
  if (!(N >= 1.0) || !(A >= 0.0) || !(B >= 0.0) || !(delta >= 0.0)) {
    throw DomainError("sobolev_maximal_bound: requires N >= 1 and A, B, delta >= 0");
  }
  return std::sqrt(N) * A + std::sqrt(2.0 * N * A * B * delta);
}

}  // namespace dcl
