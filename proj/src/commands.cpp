#include "dcl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dcl/error.hpp"
#include "dcl/expsums.hpp"
#include "dcl/grid_io.hpp"
#include "dcl/multipliers.hpp"
#include "dcl/operators.hpp"
#include "dcl/parallel.hpp"

namespace dcl {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name,
                       std::ios::openmode mode = std::ios::out) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / name, mode | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + (fs::path(cfg.out) / name).string());
  return os;
}

void write_json(const ExperimentConfig& cfg, const std::string& name, const json& j) {
  auto os = open_out(cfg, name);
  os << j.dump(2) << '\n';
}

void write_config(const ExperimentConfig& cfg) {
  auto os = open_out(cfg, cfg.command + "_config.txt");
  os << cfg.dump_text();
}

/// One CSV line from already formatted cells.
void csv_row(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::string fd(double v) { return fmt_double(v); }
template <class I>
std::string fi(I v) { return std::to_string(v); }

/// Generator for one labelled substream of the experiment seed.
std::mt19937_64 stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (auto t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::ldexp(static_cast<double>(rng() >> 11), -53);
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi_exclusive) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi_exclusive - lo));
}

/// Cutoffs with the configured fault applied.
CutoffSpec effective_cutoff(const ExperimentConfig& cfg) {
  CutoffSpec c = cfg.cutoff;
  if (cfg.fault == "shrink_tilde") {
    c.tilde_plateau = 0.25;  // chi~ no longer 1 on supp chi
    c.tilde_support = 0.4;
  }
  return c;
}

/// Smallest j >= j_lo with floor(eps1 j) >= s.
int first_scale_for(int s, int j_lo, const ArcParams& p) {
  int j = std::max(j_lo, 1);
  while (p.floor_eps1(j) < s) ++j;
  return j;
}

/// {0} and +-2^e for e = lo, lo + step, ..., hi, ascending.
std::vector<double> signed_dyadic_values(double lo, double hi, double step) {
  std::vector<double> pos;
  const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::int64_t k = 0; k < count; ++k) pos.push_back(std::exp2(lo + static_cast<double>(k) * step));
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back(-*it);
  out.push_back(0.0);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

// ---------------------------------------------------------------- weyl

}  // namespace

int cmd_weyl(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const auto fit = fit_decay_exponent(cfg.q_max, cfg.d, cfg.n);
  const auto orth = verify_orthogonality(cfg.q_max, cfg.d, cfg.n, cfg.tol);
  {
    auto os = open_out(cfg, "weyl.csv");
    csv_row(os, {"q", "max_abs"});
    for (std::size_t i = 0; i < fit.q.size(); ++i) csv_row(os, {fi(fit.q[i]), fd(fit.max_abs[i])});
  }
  json viol = json::array();
  for (const auto& p : orth.violations) viol.push_back(p.str());
  write_json(cfg, "weyl_summary.json",
             {{"d", cfg.d}, {"n", cfg.n}, {"q_max", cfg.q_max}, {"rows", fit.q.size()},
              {"delta_hat", fit.delta_hat},
              {"orthogonality", {{"cases", orth.cases}, {"max_abs", orth.max_abs}, {"tol", cfg.tol}, {"violations", viol}}}});
  log << "weyl: d=" << cfg.d << " n=" << cfg.n << " q_max=" << cfg.q_max << " delta_hat=" << fd(fit.delta_hat)
      << " orthogonality_cases=" << orth.cases << " violations=" << orth.violations.size() << '\n';
  return orth.violations.empty() ? kPass : kVerifyFailed;
}

// ---------------------------------------------------------------- approx

namespace {

struct ApproxSample {
  int j;
  ArcPair pair;
  double lambda;
  std::vector<double> xi;
};

}  // namespace

int cmd_approx(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const auto fam = cfg.family();
  const int n = cfg.n;
  // Samples are drawn serially so that the table is independent of scheduling.
  std::vector<ApproxSample> samples;
  for (int j = cfg.j_min; j <= cfg.j_max; ++j) {
    if (j < 2) continue;
    const std::int64_t q_top = std::min<std::int64_t>(cfg.q_max, std::int64_t{1} << (j - 2));
    for (std::int64_t q = 1; q <= q_top; ++q) {
      auto rng = stream(cfg.seed, {0xa550c, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(q)});
      std::vector<std::int64_t> units;
      for (std::int64_t a = 0; a < q; ++a) {
        if (std::gcd(a, q) == 1) units.push_back(a);
      }
      for (int t = 0; t < cfg.samples; ++t) {
        const std::int64_t a = units[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(units.size())))];
        std::vector<std::int64_t> b(static_cast<std::size_t>(n));
        for (auto& v : b) v = uniform_int(rng, 0, q);
        // delta log-uniform in (2^-j, 1/2), offsets uniform inside the delta-box.
        const double delta = std::exp2(uniform(rng, -static_cast<double>(j), -1.0));
        const double lam = static_cast<double>(a) / static_cast<double>(q) +
                           uniform(rng, -1.0, 1.0) * delta * std::ldexp(1.0, -(2 * cfg.d - 1) * j);
        std::vector<double> xi(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          xi[static_cast<std::size_t>(k)] =
              static_cast<double>(b[static_cast<std::size_t>(k)]) / static_cast<double>(q) + uniform(rng, -1.0, 1.0) * delta;
        }
        samples.push_back({j, ArcPair::make(a, b, q), lam, std::move(xi)});
      }
    }
  }
  std::vector<ApproxResult> res(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    res[i] = approx_error(fam, samples[i].j, samples[i].pair, samples[i].lambda, samples[i].xi, cfg.quad);
  });

  std::map<int, double> max_ratio;
  std::map<int, std::size_t> count;
  double max_quad = 0.0;
  {
    auto os = open_out(cfg, "approx.csv");
    os << "j,q,a,";
    for (int k = 1; k <= n; ++k) os << "b_" << k << ',';
    os << "lambda,";
    for (int k = 1; k <= n; ++k) os << "xi_" << k << ',';
    os << "delta,abs_err,bound_ratio,quad_error\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      os << s.j << ',' << s.pair.q << ',' << s.pair.a << ',';
      for (auto b : s.pair.b) os << b << ',';
      os << fd(s.lambda) << ',';
      for (auto x : s.xi) os << fd(x) << ',';
      os << fd(res[i].delta) << ',' << fd(std::abs(res[i].err)) << ',' << fd(res[i].bound_ratio) << ','
         << fd(res[i].quad_error) << '\n';
      max_ratio[s.j] = std::max(max_ratio[s.j], res[i].bound_ratio);
      ++count[s.j];
      max_quad = std::max(max_quad, res[i].quad_error);
    }
  }
  std::vector<double> js, ratios;
  {
    auto os = open_out(cfg, "approx_summary.csv");
    csv_row(os, {"j", "samples", "max_bound_ratio"});
    for (const auto& [j, r] : max_ratio) {
      csv_row(os, {fi(j), fi(count[j]), fd(r)});
      js.push_back(j);
      ratios.push_back(r);
    }
  }
  json summary = {{"samples", samples.size()}, {"max_quad_error", max_quad}};
  json by_j = json::object();
  for (const auto& [j, r] : max_ratio) by_j[std::to_string(j)] = r;
  summary["max_bound_ratio_by_j"] = by_j;
  double variation = 0.0, trend = 0.0;
  if (!ratios.empty()) {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    variation = *lo > 0.0 ? *hi / *lo : INFINITY;
    trend = ratios.size() >= 2 ? spearman(js, ratios) : 0.0;
    summary["variation_factor"] = variation;
    summary["spearman_trend"] = trend;
  }
  write_json(cfg, "approx_summary.json", summary);
  log << "approx: samples=" << samples.size();
  if (!ratios.empty()) log << " variation_factor=" << fd(variation) << " spearman_trend=" << fd(trend);
  log << '\n';

  if (cfg.dump) {
    for (int j = cfg.j_min; j <= cfg.j_max; ++j) {
      const auto it = std::find_if(samples.begin(), samples.end(), [j](const ApproxSample& s) { return s.j == j; });
      if (it == samples.end()) continue;
      const std::int64_t N = cfg.N > 0 ? cfg.N : std::int64_t{1} << (j + 3);
      const auto g = m_grid(fam, j, it->lambda, N);
      auto bin = open_out(cfg, "m_grid_j" + std::to_string(j) + ".bin", std::ios::out | std::ios::binary);
      write_binary(bin, g);
      if (std::pow(static_cast<double>(N), n) <= 65536.0) {
        auto csv = open_out(cfg, "m_grid_j" + std::to_string(j) + ".csv");
        write_csv(csv, g);
      }
    }
  }
  for (double r : ratios) {
    if (!std::isfinite(r)) return kVerifyFailed;
  }
  return kPass;
}

// ---------------------------------------------------------------- phi

int cmd_phi(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const auto fam = cfg.family();
  auto make_grid = [&](double step) {
    const auto lams = signed_dyadic_values(cfg.lambda_exp_lo, cfg.lambda_exp_hi, step);
    const auto xis = signed_dyadic_values(cfg.xi_exp_lo, cfg.xi_exp_hi, step);
    std::vector<PhiPoint> grid;
    for (double l : lams) {
      for (double x : xis) {
        std::vector<double> xi(static_cast<std::size_t>(fam.n), 0.0);
        xi[0] = x;
        grid.push_back({l, std::move(xi)});
      }
    }
    return grid;
  };
  const auto grid = make_grid(cfg.grid_step);
  const auto fine = make_grid(cfg.grid_step / cfg.refine);
  double c = 0.0, c_fine = 0.0, qerr = 0.0, lo = INFINITY;
  std::uint64_t unconverged = 0;
  {
    auto os = open_out(cfg, "phi.csv");
    csv_row(os, {"j", "points", "c_j", "points_refined", "c_j_refined", "max_quad_error", "unconverged"});
    for (int j = cfg.j_min; j <= cfg.j_max; ++j) {
      const auto a = verify_phi_decay(fam, j, j, grid, cfg.quad);
      const auto b = verify_phi_decay(fam, j, j, fine, cfg.quad);
      const double e = std::max(a.max_quad_error, b.max_quad_error);
      csv_row(os, {fi(j), fi(grid.size()), fd(a.c_vdc), fi(fine.size()), fd(b.c_vdc), fd(e),
                   fi(a.unconverged + b.unconverged)});
      c = std::max(c, a.c_vdc);
      lo = std::min(lo, a.c_vdc);
      c_fine = std::max(c_fine, b.c_vdc);
      qerr = std::max(qerr, e);
      unconverged += a.unconverged + b.unconverged;
    }
  }
  const double inter_j = lo > 0.0 ? c / lo : INFINITY;
  const double change = c > 0.0 ? std::abs(c_fine - c) / c : INFINITY;
  write_json(cfg, "phi_summary.json",
             {{"kernel", fam.name()}, {"points", grid.size()}, {"points_refined", fine.size()}, {"c_vdc", c},
              {"c_vdc_refined", c_fine}, {"inter_j_ratio", inter_j}, {"refinement_change", change},
              {"max_quad_error", qerr}, {"unconverged", unconverged}});
  log << "phi: points=" << grid.size() << " c_vdc=" << fd(c) << " inter_j_ratio=" << fd(inter_j)
      << " refinement_change=" << fd(change) << " unconverged=" << unconverged << '\n';
  return std::isfinite(c) && std::isfinite(c_fine) && unconverged == 0 ? kPass : kVerifyFailed;
}

// ---------------------------------------------------------------- arcs

namespace {

struct DisjointnessStats {
  std::size_t samples = 0;
  std::size_t max_terms = 0;
  std::size_t max_sharp_terms = 0;
  std::size_t nonzero = 0;
};

DisjointnessStats disjointness(int s, int j, int samples, std::uint64_t seed, const ArcParams& p,
                               const CutoffSpec& cut, int n) {
  auto rng = stream(seed, {0xd15, static_cast<std::uint64_t>(s)});
  const Multiplier one = [](std::span<const double>) { return cplx{1.0, 0.0}; };
  DisjointnessStats st;
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (int i = 0; i < samples; ++i) {
    double lam = uniform(rng, 0.0, 1.0);
    for (auto& v : xi) v = uniform(rng, 0.0, 1.0);
    if (i % 2 == 0) {
      // Planted near a pair of R_s so that the windows are actually met.
      const std::int64_t q = uniform_int(rng, rs_q_lo(s), rs_q_hi(s));
      lam = static_cast<double>(uniform_int(rng, 0, q)) / static_cast<double>(q) +
            uniform(rng, -1.0, 1.0) * p.xj_radius(j);
      for (auto& v : xi) {
        v = static_cast<double>(uniform_int(rng, 0, q)) / static_cast<double>(q) +
            uniform(rng, -1.0, 1.0) * cut.chi_tilde_s_radius(s);
      }
    }
    const auto terms = arc_terms(s, j, lam, xi, p, cut).size();
    const auto sharp = script_L_sharp(s, one, xi, cut).terms;
    st.max_terms = std::max(st.max_terms, terms);
    st.max_sharp_terms = std::max(st.max_sharp_terms, sharp);
    st.nonzero += terms;
    ++st.samples;
  }
  return st;
}

/// Max |L_{s,alpha}[m] - L_{s,alpha}[1] L#_s[m]| over random (alpha, xi, m).
double factorization_residual(int s, int samples, std::uint64_t seed, const CutoffSpec& cut, int n, int d,
                              std::size_t* hits) {
  auto rng = stream(seed, {0xfac7, static_cast<std::uint64_t>(s)});
  const Multiplier one = [](std::span<const double>) { return cplx{1.0, 0.0}; };
  const auto fam = KernelFamily::sign();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const std::int64_t q = uniform_int(rng, rs_q_lo(s), rs_q_hi(s));
    const auto alpha = reduce(uniform_int(rng, 0, q), q);
    std::vector<double> xi(static_cast<std::size_t>(n));
    for (auto& v : xi) {
      v = static_cast<double>(uniform_int(rng, 0, q)) / static_cast<double>(q) +
          uniform(rng, -0.6, 0.6) * std::ldexp(1.0, -cut.scale_exponent * s);
    }
    Multiplier m;
    if (i % 2 == 0 && n == 1) {
      const int j = static_cast<int>(uniform_int(rng, 3, 6));
      const double lam = uniform(rng, -1e-3, 1e-3);
      m = [fam, j, lam](std::span<const double> e) { return phi(fam, j, lam, e).value; };
    } else {
      const double c1 = uniform(rng, -1.0, 1.0), c2 = uniform(rng, -1.0, 1.0);
      const int k1 = static_cast<int>(uniform_int(rng, 1, 8)), k2 = static_cast<int>(uniform_int(rng, 1, 8));
      m = [=](std::span<const double> e) {
        double t = 0.0;
        for (double v : e) t += v;
        return cplx{1.0 + c1 * std::cos(kTwoPi * k1 * t), c2 * std::sin(kTwoPi * k2 * t)};
      };
    }
    const auto lhs = script_L(s, alpha, m, xi, cut, d);
    const auto rhs = script_L(s, alpha, one, xi, cut, d).value * script_L_sharp(s, m, xi, cut).value;
    worst = std::max(worst, std::abs(lhs.value - rhs));
    if (hits) *hits += lhs.terms;
  }
  return worst;
}

}  // namespace

int cmd_arcs(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const auto fam = cfg.family();
  const auto p = cfg.arc_params();
  const auto cut = effective_cutoff(cfg);
  bool ok = true;
  json sj = json::array();
  {
    auto os = open_out(cfg, "arcs.csv");
    csv_row(os, {"s", "j", "samples", "max_terms", "max_sharp_terms", "nonzero_terms", "max_factorization_residual",
                 "factorization_hits"});
    for (int s = 1; s <= cfg.s_max; ++s) {
      const int j = first_scale_for(s, cfg.j_min, p);
      const auto st = disjointness(s, j, cfg.samples, cfg.seed, p, cut, cfg.n);
      std::size_t hits = 0;
      const double res = factorization_residual(s, cfg.samples, cfg.seed, cut, cfg.n, cfg.d, &hits);
      csv_row(os, {fi(s), fi(j), fi(st.samples), fi(st.max_terms), fi(st.max_sharp_terms), fi(st.nonzero), fd(res),
                   fi(hits)});
      const bool pass = st.max_terms <= 1 && st.max_sharp_terms <= 1 && res <= cfg.tol;
      ok = ok && pass;
      sj.push_back({{"s", s}, {"j", j}, {"max_terms", st.max_terms}, {"max_sharp_terms", st.max_sharp_terms},
                    {"max_factorization_residual", res}, {"pass", pass}});
      log << "arcs: s=" << s << " max_terms=" << st.max_terms << " max_sharp_terms=" << st.max_sharp_terms
          << " factorization_residual=" << fd(res) << (pass ? " PASS" : " FAIL") << '\n';
    }
  }

  // E-decay sweep over lambda in X_j and xi on the uniform grid k/N.
  std::vector<double> js, logs;
  std::vector<double> maxE;
  double qerr_all = 0.0;
  {
    auto os = open_out(cfg, "arcs_E.csv");
    csv_row(os, {"j", "trial", "alpha", "lambda", "N", "max_abs_E", "quad_error"});
    for (int j = cfg.j_min; j <= cfg.j_max; ++j) {
      const int f = p.floor_eps1(j);
      double best = 0.0;
      if (f >= 1) {
        const auto alphas = farey_set((std::int64_t{1} << f) - 1);
        const std::int64_t N = cfg.N > 0 ? cfg.N : std::int64_t{1} << (j + 3);
        auto rng = stream(cfg.seed, {0xe, static_cast<std::uint64_t>(j)});
        for (int t = 0; t < cfg.trials; ++t) {
          const auto& alpha = alphas[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(alphas.size())))];
          const double lam = alpha.value() + uniform(rng, -1.0, 1.0) * p.xj_radius(j);
          double qerr = 0.0;
          const auto E = E_grid(fam, j, lam, N, p, cut, cfg.quad, &qerr);
          double m = 0.0;
          for (const auto& v : E) m = std::max(m, std::abs(v));
          csv_row(os, {fi(j), fi(t), alpha.str(), fd(lam), fi(N), fd(m), fd(qerr)});
          best = std::max(best, m);
          qerr_all = std::max(qerr_all, qerr);
        }
      }
      maxE.push_back(best);
      if (best > 0.0) {
        js.push_back(j);
        logs.push_back(std::log2(best));
      }
    }
  }
  bool decreasing = maxE.size() >= 2;
  for (std::size_t i = 1; i < maxE.size(); ++i) decreasing = decreasing && maxE[i] < maxE[i - 1];
  const double gamma = js.size() >= 2 ? -ols_slope(js, logs) : 0.0;
  {
    auto os = open_out(cfg, "arcs_E_summary.csv");
    csv_row(os, {"j", "max_abs_E"});
    for (std::size_t i = 0; i < maxE.size(); ++i) csv_row(os, {fi(cfg.j_min + static_cast<int>(i)), fd(maxE[i])});
  }
  json ej = json::object();
  for (std::size_t i = 0; i < maxE.size(); ++i) ej[std::to_string(cfg.j_min + static_cast<int>(i))] = maxE[i];
  write_json(cfg, "arcs_summary.json",
             {{"eps1", cfg.eps1}, {"cutoff_scale", cut.scale_exponent}, {"fault", cfg.fault}, {"per_s", sj},
              {"max_abs_E_by_j", ej}, {"strictly_decreasing", decreasing}, {"gamma_hat", gamma},
              {"max_quad_error", qerr_all}});
  log << "arcs: E sweep j=" << cfg.j_min << ".." << cfg.j_max << " strictly_decreasing=" << (decreasing ? "yes" : "no")
      << " gamma_hat=" << fd(gamma) << '\n';
  return ok ? kPass : kVerifyFailed;
}

// ---------------------------------------------------------------- carleson

namespace {

/// ||sum_{j <= J} K_j||_2 from the lattice samples of each piece.
double kernel_sum_l2(const KernelFamily& fam, int J) {
  std::map<std::vector<std::int64_t>, double> acc;
  for (int j = 1; j <= J; ++j) {
    for (const auto& s : lattice_kernel_samples(fam, j)) acc[s.y] += s.value;
  }
  double sq = 0.0;
  for (const auto& [y, v] : acc) sq += v * v;
  return std::sqrt(sq);
}

}  // namespace

int cmd_carleson(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const auto fam = cfg.family();
  const LambdaGrid grid(cfg.M);
  json per_J = json::array();
  std::vector<double> maxima;
  double delta0_err = 0.0;
  {
    auto os = open_out(cfg, "carleson.csv");
    csv_row(os, {"J", "trial", "ratio"});
    for (int J = cfg.J_min; J <= cfg.J_max; ++J) {
      const auto st = norm_ratio_stats(fam, J, grid, cfg.trials, cfg.radius, cfg.seed);
      for (std::size_t t = 0; t < st.ratios.size(); ++t) csv_row(os, {fi(J), fi(t), fd(st.ratios[t])});
      const double ref = kernel_sum_l2(fam, J);
      const double err = std::abs(st.ratios[0] - ref);
      delta0_err = std::max(delta0_err, err);
      maxima.push_back(st.max_ratio);
      per_J.push_back({{"J", J}, {"max_ratio", st.max_ratio}, {"delta0_ratio", st.ratios[0]},
                       {"kernel_sum_l2", ref}, {"grid_error_bound", st.grid_error_bound}});
    }
  }
  const double stab = maxima.front() > 0.0 ? (maxima.back() - maxima.front()) / maxima.front() : 0.0;
  write_json(cfg, "carleson_summary.json",
             {{"kernel", fam.name()}, {"M", cfg.M}, {"trials", cfg.trials}, {"radius", cfg.radius}, {"per_J", per_J},
              {"J_stabilization_delta", stab}, {"delta0_max_error", delta0_err}});
  log << "carleson: J=" << cfg.J_min << ".." << cfg.J_max << " max_ratio=" << fd(maxima.back())
      << " J_stabilization_delta=" << fd(stab) << " delta0_error=" << fd(delta0_err) << '\n';
  if (cfg.dump) {
    const auto f = random_lattice_function(fam.n, cfg.radius, cfg.seed * 0x100000001b3ull + 1);
    const auto r = carleson_apply(fam, f, cfg.J_max, grid);
    auto bin = open_out(cfg, "carleson_Cf.bin", std::ios::out | std::ios::binary);
    write_binary(bin, r.Cf);
    auto csv = open_out(cfg, "carleson_Cf.csv");
    write_csv(csv, r.Cf);
  }
  return delta0_err <= 1e-10 ? kPass : kVerifyFailed;
}

// ---------------------------------------------------------------- kappa

namespace {

struct KappaSweep {
  std::uint64_t cases = 0;
  double max_discrepancy = 0.0;
};

std::vector<ReducedRational> reduced_upto(std::int64_t q_max) {
  std::vector<ReducedRational> out;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    for (std::int64_t a = 0; a < q; ++a) {
      if (std::gcd(a, q) == 1) out.push_back({a, q});
    }
  }
  return out;
}

/// Integer points with Euclidean norm <= w_max.
std::vector<std::vector<std::int64_t>> ball_points(int n, std::int64_t w_max) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> w(static_cast<std::size_t>(n), -w_max);
  while (true) {
    std::int64_t r2 = 0;
    for (auto v : w) r2 += v * v;
    if (r2 <= w_max * w_max) out.push_back(w);
    int a = n - 1;
    while (a >= 0 && w[static_cast<std::size_t>(a)] == w_max) w[static_cast<std::size_t>(a--)] = -w_max;
    if (a < 0) break;
    ++w[static_cast<std::size_t>(a)];
  }
  return out;
}

KappaSweep kappa_sweep(std::int64_t q_max, std::int64_t w_max, int d, int n) {
  const auto rats = reduced_upto(q_max);
  const auto ws = ball_points(n, w_max);
  const std::size_t P = rats.size() * rats.size();
  std::vector<double> worst(P, 0.0);
  parallel_for(P, [&](std::size_t idx) {
    const auto& al = rats[idx / rats.size()];
    const auto& ap = rats[idx % rats.size()];
    for (const auto& w : ws) worst[idx] = std::max(worst[idx], kappa_forms(al, ap, w, d).discrepancy());
  });
  KappaSweep out;
  out.cases = static_cast<std::uint64_t>(P * ws.size());
  for (double v : worst) out.max_discrepancy = std::max(out.max_discrepancy, v);
  return out;
}

}  // namespace

int cmd_kappa(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  bool ok = true;
  json rows = json::array();
  auto os = open_out(cfg, "kappa.csv");
  csv_row(os, {"d", "n", "q_max", "w_max", "cases", "max_discrepancy"});
  for (int d = 1; d <= cfg.d_max; ++d) {
    for (int n = 1; n <= cfg.n_max; ++n) {
      const std::int64_t qcap = n == 1 ? cfg.q_max : std::min(cfg.q_max, cfg.q_max_2d);
      const auto r = kappa_sweep(qcap, cfg.w_max, d, n);
      csv_row(os, {fi(d), fi(n), fi(qcap), fi(cfg.w_max), fi(r.cases), fd(r.max_discrepancy)});
      const bool pass = r.max_discrepancy <= cfg.tol;
      ok = ok && pass;
      rows.push_back({{"d", d}, {"n", n}, {"q_max", qcap}, {"cases", r.cases}, {"max_discrepancy", r.max_discrepancy},
                      {"pass", pass}});
      log << "kappa: d=" << d << " n=" << n << " q_max=" << qcap << " cases=" << r.cases
          << " max_discrepancy=" << fd(r.max_discrepancy) << (pass ? " PASS" : " FAIL") << '\n';
    }
  }
  write_json(cfg, "kappa_summary.json", {{"w_max", cfg.w_max}, {"tol", cfg.tol}, {"sweeps", rows}});
  return ok ? kPass : kVerifyFailed;
}

// ---------------------------------------------------------------- verify

namespace {

struct SuiteResult {
  bool pass = false;
  std::string metric;
  double value = 0.0;
};

SuiteResult suite_partition(const ExperimentConfig& cfg) {
  auto rng = stream(cfg.seed, {0x9a});
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = std::exp2(uniform(rng, -15.0, 15.0));
    double s = 0.0;
    for (int j = -20; j <= 20; ++j) s += psi_j(j, r);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return {worst <= 1e-10, "max_abs_deviation", worst};
}

SuiteResult suite_phi(const ExperimentConfig& cfg) {
  const auto fam = cfg.family();
  if (fam.n > 2) return {true, "skipped_dimension", static_cast<double>(fam.n)};
  std::vector<double> probe(static_cast<std::size_t>(fam.n), 0.0), mprobe(probe.size());
  probe[0] = 1.3;
  if (fam.n > 1) probe[1] = 0.4;
  for (std::size_t k = 0; k < probe.size(); ++k) mprobe[k] = -probe[k];
  const double parity = fam.kernel(mprobe) / fam.kernel(probe);
  auto rng = stream(cfg.seed, {0xf1});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int j = static_cast<int>(uniform_int(rng, 1, fam.n == 1 ? 7 : 4));
    const double lam = uniform(rng, -0.5, 0.5) * std::ldexp(1.0, -2 * fam.d * j);
    std::vector<double> xi(static_cast<std::size_t>(fam.n)), mxi(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) {
      xi[k] = uniform(rng, -0.5, 0.5) * std::ldexp(4.0, -j);
      mxi[k] = -xi[k];
    }
    const auto a = phi(fam, j, lam, xi, cfg.quad).value;
    worst = std::max(worst, std::abs(phi(fam, j, -lam, mxi, cfg.quad).value - std::conj(a)));
    worst = std::max(worst, std::abs(phi(fam, j, lam, mxi, cfg.quad).value - parity * a));
  }
  std::vector<double> zero(static_cast<std::size_t>(fam.n), 0.0);
  for (int j = 1; j <= 4; ++j) worst = std::max(worst, std::abs(phi(fam, j, 0.0, zero, cfg.quad).value));
  return {worst <= 1e-9, "max_symmetry_defect", worst};
}

SuiteResult suite_disjointness(const ExperimentConfig& cfg) {
  const auto p = cfg.arc_params();
  const auto cut = effective_cutoff(cfg);
  std::size_t worst = 0;
  for (int s = 1; s <= std::min(cfg.s_max, 3); ++s) {
    const auto st = disjointness(s, first_scale_for(s, 1, p), cfg.samples, cfg.seed, p, cut, cfg.n);
    worst = std::max({worst, st.max_terms, st.max_sharp_terms});
  }
  return {worst <= 1, "max_nonzero_terms", static_cast<double>(worst)};
}

SuiteResult suite_factorization(const ExperimentConfig& cfg) {
  const auto cut = effective_cutoff(cfg);
  double worst = 0.0;
  for (int s = 1; s <= std::min(cfg.s_max, 3); ++s) {
    worst = std::max(worst, factorization_residual(s, std::max(1, cfg.samples / 4), cfg.seed, cut, cfg.n, cfg.d, nullptr));
  }
  return {worst <= 1e-10, "max_residual", worst};
}

SuiteResult suite_kappa(const ExperimentConfig&) {
  double worst = 0.0;
  for (int d = 1; d <= 2; ++d) worst = std::max(worst, kappa_sweep(6, 6, d, 1).max_discrepancy);
  worst = std::max(worst, kappa_sweep(4, 3, 1, 2).max_discrepancy);
  return {worst <= 1e-9, "max_discrepancy", worst};
}

SuiteResult suite_rm(const ExperimentConfig& cfg) {
  auto rng = stream(cfg.seed, {0x7a});
  std::normal_distribution<double> g;
  double worst = -INFINITY;
  for (int s = 0; s <= 8; ++s) {
    for (int t = 0; t < 200; ++t) {
      std::vector<cplx> a((std::size_t{1} << s) + 1);
      for (auto& v : a) v = {g(rng), g(rng)};
      const auto r = rm_bound(a, static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(a.size()))));
      worst = std::max(worst, r.lhs - r.rhs);
    }
  }
  const std::vector<cplx> inc{0.0, 1.0, 2.0}, bump{0.0, 1.0, 0.0};
  const bool hand = std::abs(rm_bound(inc, 0).rhs - std::sqrt(2.0) * (std::sqrt(2.0) + 2.0)) <= 1e-12 &&
                    std::abs(rm_bound(bump, 0).rhs - 2.0) <= 1e-12;
  return {hand && worst <= 1e-12, "max_lhs_minus_rhs", worst};
}

SuiteResult suite_decay(const ExperimentConfig&) {
  const double d1 = fit_decay_exponent(64, 1, 1).delta_hat;
  const double d2 = fit_decay_exponent(64, 2, 1).delta_hat;
  return {d1 >= 0.4 && d2 > 0.05, "min_delta_hat", std::min(d1, d2)};
}

SuiteResult suite_orthogonality(const ExperimentConfig&) {
  double worst = 0.0;
  std::size_t viol = 0;
  for (int d = 1; d <= 2; ++d) {
    const auto a = verify_orthogonality(30, d, 1);
    const auto b = verify_orthogonality(12, d, 2);
    worst = std::max({worst, a.max_abs, b.max_abs});
    viol += a.violations.size() + b.violations.size();
  }
  return {viol == 0, "max_abs", worst};
}

}  // namespace

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log) {
  write_config(cfg);
  using Suite = std::function<SuiteResult(const ExperimentConfig&)>;
  const std::vector<std::pair<std::string, Suite>> suites = {
      {"partition", suite_partition},   {"phi", suite_phi},     {"disjointness", suite_disjointness},
      {"factorization", suite_factorization}, {"kappa", suite_kappa}, {"rm", suite_rm},
      {"decay", suite_decay},           {"orthogonality", suite_orthogonality}};
  bool ok = true;
  auto os = open_out(cfg, "verify.csv");
  csv_row(os, {"suite", "pass", "metric", "value"});
  for (const auto& [name, fn] : suites) {
    if (cfg.suite != "all" && cfg.suite != name) continue;
    const auto r = fn(cfg);
    ok = ok && r.pass;
    csv_row(os, {name, r.pass ? "1" : "0", r.metric, fd(r.value)});
    log << "suite " << name << ": " << (r.pass ? "PASS" : "FAIL") << ' ' << r.metric << '=' << fd(r.value) << '\n';
  }
  return ok ? kPass : kVerifyFailed;
}

int run_command(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  static const std::map<std::string, int (*)(const ExperimentConfig&, std::ostream&)> table = {
      {"weyl", cmd_weyl},         {"approx", cmd_approx}, {"phi", cmd_phi},      {"arcs", cmd_arcs},
      {"carleson", cmd_carleson}, {"kappa", cmd_kappa},   {"verify", cmd_verify}};
  const auto it = table.find(cfg.command);
  if (it == table.end()) {
    err << "error: unknown command '" << cfg.command << "'\n";
    return kConfigError;
  }
  const unsigned saved = worker_count();
  set_worker_count(cfg.workers);
  int status = kPass;
  try {
    status = it->second(cfg, log);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    status = kConfigError;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    status = kConfigError;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    status = kBudgetError;
  } catch (const OverflowError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    status = kBudgetError;
  } catch (const fs::filesystem_error& e) {
    err << "configuration error: " << e.what() << '\n';
    status = kConfigError;
  }
  set_worker_count(saved);
  return status;
}

}  // namespace dcl
