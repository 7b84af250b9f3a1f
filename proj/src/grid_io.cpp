#include "dcl/grid_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "dcl/error.hpp"

namespace dcl {
namespace {

static_assert(std::endian::native == std::endian::little, "binary grid I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw DomainError("grid_io: truncated input");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_values(std::ostream& os, const std::vector<cplx>& values) {
  for (const auto& v : values) {
    put(os, v.real());
    put(os, v.imag());
  }
}

std::vector<cplx> get_values(std::istream& is, std::size_t count) {
  std::vector<cplx> values(count);
  for (auto& v : values) {
    const double re = get<double>(is);
    v = {re, get<double>(is)};
  }
  return values;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_binary(std::ostream& os, const MultiplierGrid& g) {
  put<std::int64_t>(os, g.n);
  put<std::int64_t>(os, g.N);
  put<std::int64_t>(os, g.j);
  put<double>(os, g.lambda);
  put_values(os, g.values);
}

MultiplierGrid read_multiplier_grid(std::istream& is) {
  MultiplierGrid g;
  g.n = static_cast<int>(get<std::int64_t>(is));
  g.N = get<std::int64_t>(is);
  g.j = static_cast<int>(get<std::int64_t>(is));
  g.lambda = get<double>(is);
  if (g.n < 1 || g.N < 1) throw DomainError("grid_io: bad grid header");
  std::size_t count = 1;
  for (int a = 0; a < g.n; ++a) count *= static_cast<std::size_t>(g.N);
  g.values = get_values(is, count);
  return g;
}

void write_binary(std::ostream& os, const LatticeFunction& f) {
  f.check();
  put<std::int64_t>(os, f.n);
  for (auto v : f.lo) put<std::int64_t>(os, v);
  for (auto v : f.shape) put<std::int64_t>(os, v);
  put_values(os, f.values);
}

LatticeFunction read_lattice_function(std::istream& is) {
  LatticeFunction f;
  f.n = static_cast<int>(get<std::int64_t>(is));
  if (f.n < 1) throw DomainError("grid_io: bad lattice header");
  for (int a = 0; a < f.n; ++a) f.lo.push_back(get<std::int64_t>(is));
  std::size_t count = 1;
  for (int a = 0; a < f.n; ++a) {
    f.shape.push_back(get<std::int64_t>(is));
    if (f.shape.back() < 0) throw DomainError("grid_io: bad lattice header");
    count *= static_cast<std::size_t>(f.shape.back());
  }
  f.values = get_values(is, count);
  return f;
}

void write_csv(std::ostream& os, const MultiplierGrid& g) {
  for (int a = 0; a < g.n; ++a) os << "k_" << a + 1 << ',';
  for (int a = 0; a < g.n; ++a) os << "xi_" << a + 1 << ',';
  os << "re,im\n";
  std::vector<std::int64_t> k(static_cast<std::size_t>(g.n), 0);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    for (auto v : k) os << v << ',';
    for (auto v : k) os << fmt_double(static_cast<double>(v) / static_cast<double>(g.N)) << ',';
    os << fmt_double(g.values[i].real()) << ',' << fmt_double(g.values[i].imag()) << '\n';
    for (int a = g.n - 1; a >= 0; --a) {
      if (++k[static_cast<std::size_t>(a)] < g.N) break;
      k[static_cast<std::size_t>(a)] = 0;
    }
  }
}

void write_csv(std::ostream& os, const LatticeFunction& f) {
  f.check();
  for (int a = 0; a < f.n; ++a) os << "x_" << a + 1 << ',';
  os << "re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (auto v : f.point(i)) os << v << ',';
    os << fmt_double(f.values[i].real()) << ',' << fmt_double(f.values[i].imag()) << '\n';
  }
}

}  // namespace dcl
