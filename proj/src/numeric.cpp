#include "dcl/numeric.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dcl/error.hpp"

namespace dcl {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_size) {
  if (x.size() != y.size()) throw DomainError("fit: x and y differ in length");
  if (x.size() < min_size) throw DomainError("fit: too few points");
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t k = i;
    while (k + 1 < order.size() && v[order[k + 1]] == v[order[i]]) ++k;
    const double rank = 0.5 * static_cast<double>(i + k) + 1.0;
    for (std::size_t m = i; m <= k; ++m) ranks[order[m]] = rank;
    i = k + 1;
  }
  return ranks;
}

}  // namespace

long double frac_mul(double x, std::int64_t m) {
  if (x == 0.0 || m == 0) return 0.0L;
  int e = 0;
  const double mant = std::frexp(x, &e);  // x = mant * 2^e, |mant| in [0.5, 1)
  const auto M = static_cast<__int128>(std::ldexp(mant, 53));
  const int k = 53 - e;  // x = M * 2^-k
  if (k <= 0) return 0.0L;
  const __int128 P = M * m;
  if (k > 116) {
    // |x m| < 1 here.
    const long double v = std::ldexp(static_cast<long double>(P), -k);
    return v < 0.0L ? v + 1.0L : v;
  }
  const __int128 mask = (static_cast<__int128>(1) << k) - 1;
  const __int128 r = P & mask;  // two's complement: floor mod 2^k
  return std::ldexp(static_cast<long double>(r), -k);
}

double slope_through_origin(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 1);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (sxx == 0.0) throw DomainError("fit: degenerate abscissae");
  return sxy / sxx;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fit: degenerate abscissae");
  return sxy / sxx;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double m = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - m) * (ry[i] - m);
    sxx += (rx[i] - m) * (rx[i] - m);
    syy += (ry[i] - m) * (ry[i] - m);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace dcl
