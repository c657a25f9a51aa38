// Command-line front end: zero-dispersion scans, soliton spectra, resolvent
// tables, small-dispersion simulation and the property-verification battery.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>

#include "bo/io.hpp"
#include "bo/lax_spectral.hpp"
#include "bo/parallel.hpp"
#include "bo/pde_sim.hpp"
#include "bo/toeplitz.hpp"
#include "bo/zdlimit.hpp"

namespace {

using namespace bo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

Range parse_range(const std::string& s) {
    Range r;
    const auto a = s.find(':');
    const auto b = s.rfind(':');
    if (a == std::string::npos || b == a) throw ConfigError("range must be min:max:count");
    r.lo = std::stod(s.substr(0, a));
    r.hi = std::stod(s.substr(a + 1, b - a - 1));
    r.count = std::stoi(s.substr(b + 1));
    if (r.count < 2) throw ConfigError("range count must be >= 2");
    return r;
}

cplx parse_complex(const std::string& s) {
    const auto c = s.find(',');
    if (c == std::string::npos) return cplx(std::stod(s), 0.0);
    return cplx(std::stod(s.substr(0, c)), std::stod(s.substr(c + 1)));
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

RealRationalSymbol random_symbol(std::mt19937_64& rng, int max_poles = 3) {
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    std::uniform_real_distribution<double> re(-1.5, 1.5);
    std::uniform_real_distribution<double> im(0.5, 2.0);
    while (true) {
        const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_poles));
        std::vector<RealRationalSymbol::Pole> poles;
        for (int j = 0; j < n; ++j) poles.push_back({cplx(c(rng), c(rng)), cplx(re(rng), im(rng))});
        bool separated = true;
        for (int i = 0; i < n && separated; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(poles[static_cast<std::size_t>(i)].p - poles[static_cast<std::size_t>(j)].p) < 0.25) {
                    separated = false;
                    break;
                }
        if (separated) return RealRationalSymbol(std::move(poles));
    }
}

int cmd_zd(const std::string& symbol_path, int n, double t, const std::string& xrange,
           bool oracle, const std::string& out_dir, std::uint64_t seed) {
    const RealRationalSymbol u0 = load_symbol(symbol_path);
    const Range r = parse_range(xrange);
    const json cfg{{"cmd", "zd"}, {"symbol", symbol_path}, {"n", n}, {"t", t}, {"x", xrange},
                   {"oracle", oracle}};
    const std::uint64_t h = config_hash(cfg);

    const auto rows = zd_scan(u0, n, t, r.lo, r.hi, r.count);

    std::vector<double> oracle_vals(rows.size(), 0.0);
    std::vector<double> oracle_errs(rows.size(), 0.0);
    if (oracle && t != 0.0) {
        parallel_for(rows.size(), [&](std::size_t i) {
            if (rows[i].critical) return;
            oracle_vals[i] = zd_boundary_oracle(u0, n, t, rows[i].x);
            oracle_errs[i] = std::abs(oracle_vals[i] - rows[i].value);
        });
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            oracle_vals[i] = rows[i].value;
        }
    }

    const auto dir = std::filesystem::path(out_dir);
    std::filesystem::create_directories(dir);
    CsvWriter csv((dir / "zd.csv").string(), h, seed,
                  "t,x,n,ell,critical,zd_value,branches,oracle_value,oracle_err");
    json jrows = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = rows[i];
        std::string branches;
        for (std::size_t k = 0; k < s.real_branches.size(); ++k) {
            if (k) branches += ';';
            branches += std::to_string(s.real_branches[k]);
        }
        csv.row(s.t, s.x, s.n, s.ell, s.critical ? 1 : 0, s.critical ? 0.0 : s.value, branches,
                oracle_vals[i], oracle_errs[i]);
        jrows.push_back({{"t", s.t}, {"x", s.x}, {"n", s.n}, {"ell", s.ell},
                         {"critical", s.critical}, {"zd_value", s.critical ? 0.0 : s.value},
                         {"branches", s.real_branches}, {"oracle_value", oracle_vals[i]},
                         {"oracle_err", oracle_errs[i]}});
    }

    // Summary: breaking time, critical abscissae in range, component structure.
    json summary{{"config_hash", hash_hex(h)}, {"seed", seed}};
    summary["first_breaking_time"] = first_breaking_time(u0, n);
    const auto crit = critical_set(u0, n, t, r.lo, r.hi, std::max(256, r.count));
    summary["critical_abscissae"] = crit;
    json comps = json::array();
    int run_ell = -1;
    for (const auto& s : rows) {
        if (s.critical) {
            run_ell = -1;
            continue;
        }
        if (s.ell != run_ell) {
            comps.push_back({{"x_start", s.x}, {"ell", s.ell}});
            run_ell = s.ell;
        }
    }
    summary["components"] = comps;
    summary["rows"] = jrows;
    std::ofstream(dir / "zd.json") << summary.dump(2) << "\n";
    std::cout << "zd: wrote " << rows.size() << " samples, " << crit.size()
              << " critical abscissae\n";
    return kExitOk;
}

int cmd_soliton(const std::string& p_str, int n_max, const std::string& m_list, double xi,
                const std::string& out_dir, std::uint64_t seed) {
    const cplx p = parse_complex(p_str);
    const RealRationalSymbol u0 = RealRationalSymbol::soliton(p);
    if (xi <= 0.0) xi = FourierGrid::suggested_cutoff(u0);
    const json cfg{{"cmd", "soliton"}, {"p_re", p.real()}, {"p_im", p.imag()},
                   {"n_max", n_max}, {"m_list", m_list}, {"xi", xi}};
    const std::uint64_t h = config_hash(cfg);
    const auto dir = std::filesystem::path(out_dir);
    std::filesystem::create_directories(dir);

    const double lambda_exact = -1.0 / (2.0 * p.imag());
    CsvWriter spec_csv((dir / "soliton_spectrum.csv").string(), h, seed,
                       "m,xi,lambda,lambda_err,wu_modulus_residual,wu_trace_residual,"
                       "re_p_estimate,im_p_estimate");
    for (double md : parse_list(m_list)) {
        const int m = static_cast<int>(md);
        const FourierGrid g{xi, m};
        const SpectrumResult sp = discrete_spectrum(u0, g);
        if (sp.discrete_pairs.empty()) throw Error("soliton: no bound state at M=" + std::to_string(m));
        const auto& pair = sp.discrete_pairs.front();
        const auto wu = wu_residuals_for_pair(g, pair, sample_hardy(g, u0.hardy_part()));
        // diagnostic only: p = -<X* phi, phi> for the normalized eigenfunction
        const GridFn xphi = op_xstar(g).apply(pair.phi);
        const cplx p_est = -inner(g, xphi, pair.phi);
        spec_csv.row(m, xi, wu.lambda, std::abs(wu.lambda - lambda_exact),
                     wu.modulus_residual, wu.trace_residual, p_est.real(), p_est.imag());
    }

    CsvWriter vel_csv((dir / "soliton_velocity.csv").string(), h, seed,
                      "n,velocity,formula_re_err_at_reference_z");
    const FourierGrid gref{xi, 1024};
    for (int n = 1; n <= n_max; ++n) {
        const double c = soliton_velocity(n, p);
        const double t = 0.5;
        const cplx z(0.0, 1.0);
        const cplx want = cplx(0.0, 1.0) / (z - c * t + p);
        const cplx got = explicit_formula_eval(u0, n, t, z, gref);
        vel_csv.row(n, c, std::abs(got - want) / std::abs(want));
    }
    std::cout << "soliton: lambda target " << lambda_exact << ", tables written\n";
    return kExitOk;
}

int cmd_resolvent(const std::string& symbol_path, int n, double t, const std::string& z_list,
                  int m, double xi, double eps, const std::string& dump_path,
                  const std::string& out_dir, std::uint64_t seed) {
    const RealRationalSymbol u0 = load_symbol(symbol_path);
    if (xi <= 0.0) xi = FourierGrid::suggested_cutoff(u0);
    const FourierGrid g{xi, m};
    const json cfg{{"cmd", "resolvent"}, {"symbol", symbol_path}, {"n", n}, {"t", t},
                   {"z", z_list}, {"m", m}, {"xi", xi}, {"eps", eps}};
    const std::uint64_t h = config_hash(cfg);
    const auto dir = std::filesystem::path(out_dir);
    std::filesystem::create_directories(dir);

    CsvWriter csv((dir / "resolvent.csv").string(), h, seed,
                  "re_z,im_z,re_explicit,im_explicit,re_zd,im_zd,re_cramer,im_cramer,"
                  "cramer_gap,amplitude_bound,within_bound");
    const double l2 = std::sqrt(u0.l2_norm_sq());
    std::size_t pos = 0;
    std::vector<cplx> zs;
    while (pos < z_list.size()) {
        auto next = z_list.find(';', pos);
        if (next == std::string::npos) next = z_list.size();
        zs.push_back(parse_complex(z_list.substr(pos, next - pos)));
        pos = next + 1;
    }
    for (cplx z : zs) {
        const cplx ex = eps > 0.0 ? eps_formula_eval(u0, n, t, eps, z, g)
                                  : explicit_formula_eval(u0, n, t, z, g);
        const cplx zd = zd_resolvent_eval(u0, n, t, z, g);
        cplx cr(0.0);
        double gap = 0.0;
        if (t != 0.0 && !u0.is_zero()) {
            cr = lambda_cramer(u0, n, t, z);
            gap = std::abs(zd - cr) / std::max(1e-300, std::abs(cr));
        }
        const double bound = l2 / (2.0 * std::sqrt(std::numbers::pi * z.imag()));
        csv.row(z.real(), z.imag(), ex.real(), ex.imag(), zd.real(), zd.imag(), cr.real(),
                cr.imag(), gap, bound, std::abs(ex) <= 1.05 * bound ? 1 : 0);
    }
    if (!dump_path.empty()) write_operator(dump_path, op_lax(g, u0));
    std::cout << "resolvent: " << zs.size() << " evaluation points written\n";
    return kExitOk;
}

int cmd_simulate(const std::string& symbol_path, int n, double eps, double length, int points,
                 double dt, double t_final, const std::string& snaps,
                 const std::string& eps_sweep, double test_center, double test_width,
                 double sweep_t, const std::string& out_dir, std::uint64_t seed) {
    const RealRationalSymbol u0 =
        symbol_path.empty() ? RealRationalSymbol{} : load_symbol(symbol_path);
    const json cfg{{"cmd", "simulate"}, {"symbol", symbol_path}, {"n", n}, {"eps", eps},
                   {"length", length}, {"points", points}, {"dt", dt}, {"t_final", t_final},
                   {"snaps", snaps}, {"eps_sweep", eps_sweep}};
    const std::uint64_t h = config_hash(cfg);
    const auto dir = std::filesystem::path(out_dir);
    std::filesystem::create_directories(dir);

    SimConfig sc;
    sc.n = n;
    sc.eps = eps;
    sc.domain_half_length = length;
    sc.grid_points = points;
    sc.dt = dt;
    sc.t_final = t_final;

    std::vector<double> snap_times = snaps.empty() ? std::vector<double>{t_final} : parse_list(snaps);
    std::sort(snap_times.begin(), snap_times.end());

    Simulator sim(sc, Simulator::sample_symbol(u0, length, points));
    CsvWriter cons((dir / "conservation.csv").string(), h, seed, "t,e0,e1,e2");
    const auto log_energy = [&] {
        const auto en = sim.conserved();
        cons.row(sim.time(), en.e0, en.e1, en.e2);
    };
    log_energy();
    const double log_every = std::max(t_final / 50.0, sim.config().dt);
    double next_log = log_every;
    for (double ts : snap_times) {
        while (sim.time() < ts - 1e-14) {
            sim.advance(std::min(ts, next_log));
            log_energy();
            if (sim.time() >= next_log - 1e-14) next_log += log_every;
        }
        std::ostringstream name;
        name << "snapshot_t" << std::setprecision(6) << ts << ".csv";
        CsvWriter snap((dir / name.str()).string(), h, seed, "x,u");
        const auto u = sim.field();
        for (int j = 0; j < points; ++j)
            snap.row(-length + 2.0 * length / points * j, u[static_cast<std::size_t>(j)]);
    }

    if (!eps_sweep.empty()) {
        if (u0.is_zero()) throw ConfigError("eps sweep needs a nonzero symbol");
        const double t_star = sweep_t > 0.0 ? sweep_t : 1.5 * first_breaking_time(u0, n);
        std::vector<double> phi(static_cast<std::size_t>(points));
        std::vector<double> xs(static_cast<std::size_t>(points));
        for (int j = 0; j < points; ++j) {
            xs[static_cast<std::size_t>(j)] = -length + 2.0 * length / points * j;
            const double sarg = (xs[static_cast<std::size_t>(j)] - test_center) / test_width;
            phi[static_cast<std::size_t>(j)] = std::exp(-sarg * sarg);
        }
        // the limit pairing via the scanner on the same abscissae
        double zd_pair = 0.0;
        {
            std::vector<double> vals(static_cast<std::size_t>(points), 0.0);
            parallel_for(static_cast<std::size_t>(points), [&](std::size_t j) {
                if (std::abs(phi[j]) < 1e-14) return;
                const ZdSample s = zd_value(u0, n, t_star, xs[j]);
                if (!s.critical) vals[j] = s.value;
            });
            for (int j = 0; j < points; ++j)
                zd_pair += vals[static_cast<std::size_t>(j)] * phi[static_cast<std::size_t>(j)] *
                           (2.0 * length / points);
        }
        CsvWriter sweep((dir / "eps_sweep.csv").string(), h, seed,
                        "eps,t,pairing,zd_pairing,abs_gap");
        for (double e : parse_list(eps_sweep)) {
            SimConfig c = sc;
            c.eps = e;
            c.dt = 0.0;  // per-eps stability bound
            Simulator s2(c, Simulator::sample_symbol(u0, length, points));
            s2.advance(t_star);
            const double pair = s2.weak_pairing(phi);
            sweep.row(e, t_star, pair, zd_pair, std::abs(pair - zd_pair));
        }
    }
    std::cout << "simulate: finished at t = " << sim.time() << "\n";
    return kExitOk;
}

struct VerifyContext {
    int failures = 0;
    json results = json::array();

    void record(const std::string& name, bool pass, const std::string& detail) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << " (" << detail << ")\n";
        results.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        if (!pass) ++failures;
    }
};

int cmd_verify(std::uint64_t seed, bool quick, const std::string& symbol_path,
               const std::string& out_dir) {
    std::mt19937_64 rng(seed);
    VerifyContext vc;
    std::ostringstream detail;

    if (!symbol_path.empty()) {
        const RealRationalSymbol u0 = load_symbol(symbol_path);
        double worst = 0.0;
        for (double y = -10.0; y <= 10.0; y += 0.21) {
            const PoleExpansion hrd = u0.hardy_part();
            const cplx rebuilt = hrd.eval(y) + std::conj(hrd.eval(y));
            worst = std::max(worst, std::abs(rebuilt - u0.eval(y)));
        }
        vc.record("fixture symbol reconstruction", worst <= 1e-12,
                  "max |Pi u0 + conj - u0| = " + std::to_string(worst));
    }

    // sum rule over all characteristic roots
    {
        const int trials = quick ? 40 : 200;
        double worst = 0.0;
        for (int k = 0; k < trials; ++k) {
            const RealRationalSymbol u0 = random_symbol(rng);
            const int n = 1 + static_cast<int>(rng() % 3);
            const double t = (k % 2 == 0) ? 0.9 : -0.6;
            const double x = -4.0 + 8.0 * double(k) / trials;
            worst = std::max(worst, sum_rule_check(u0, n, t, x));
        }
        detail.str("");
        detail << "worst residual " << worst << " over " << trials << " instances";
        vc.record("all-roots sum rule", worst <= 1e-9, detail.str());
    }

    // missing-power Vandermonde identity
    {
        const int trials = quick ? 30 : 100;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < trials; ++k) {
            const int size = 2 + static_cast<int>(rng() % 11);
            std::vector<cplx> v;
            while (static_cast<int>(v.size()) < size) {
                const cplx cand(u(rng), u(rng));
                bool ok = true;
                for (cplx w : v)
                    if (std::abs(w - cand) < 0.05) ok = false;
                if (ok) v.push_back(cand);
            }
            worst = std::max(worst, vandermonde_ratio_check(v));
        }
        detail.str("");
        detail << "worst residual " << worst << " over " << trials << " sets";
        vc.record("missing-power Vandermonde identity", worst <= 1e-10, detail.str());
    }

    // Cramer LU against the root-sum reduction (n >= 2)
    {
        const int trials = quick ? 12 : 40;
        double worst = 0.0;
        for (int k = 0; k < trials; ++k) {
            const RealRationalSymbol u0 = random_symbol(rng);
            const int n = 2 + static_cast<int>(rng() % 2);
            const double t = (k % 2 == 0) ? 0.8 : -0.5;
            const cplx z(0.4 * double(k % 5) - 0.8, 0.6 + 0.3 * double(k % 3));
            const cplx a = lambda_cramer(u0, n, t, z);
            const cplx b = lambda_root_sum(u0, n, t, z);
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
        detail.str("");
        detail << "worst relative gap " << worst;
        vc.record("Cramer solve vs root-sum reduction", worst <= 1e-9, detail.str());
    }

    // alternating sum against the Richardson boundary limit
    {
        const int trials = quick ? 8 : 24;
        double worst = 0.0;
        int used = 0;
        for (int k = 0; k < trials; ++k) {
            const RealRationalSymbol u0 = random_symbol(rng, 2);
            const int n = 1 + static_cast<int>(rng() % 3);
            const double t = 0.45;
            const double x = -3.0 + 6.0 * double(k) / trials;
            const ZdSample s = zd_value(u0, n, t, x);
            if (s.critical) continue;
            ++used;
            worst = std::max(worst, std::abs(s.value - zd_boundary_oracle(u0, n, t, x)) /
                                        (1.0 + std::abs(s.value)));
        }
        detail.str("");
        detail << "worst gap " << worst << " on " << used << " non-critical samples";
        vc.record("alternating sum vs resolvent boundary limit", worst <= 1e-6, detail.str());
    }

    // Toeplitz powers: iteration vs inductive formula
    {
        double worst = 0.0;
        for (int n = 1; n <= 4; ++n) {
            for (int k = 0; k < (quick ? 3 : 8); ++k) {
                const RealRationalSymbol u0 = random_symbol(rng);
                const PoleExpansion f = u0.hardy_part();
                const PoleExpansion a = toeplitz_power_apply(u0, n, f);
                const PoleExpansion b = toeplitz_power_formula(u0, n, f);
                worst = std::max(worst, (a - b).coeff_scale() /
                                            std::max({a.coeff_scale(), b.coeff_scale(), 1.0}));
            }
        }
        detail.str("");
        detail << "worst expansion gap " << worst;
        vc.record("Toeplitz power formula vs iteration", worst <= 1e-10, detail.str());
    }

    // grid operator battery
    {
        const RealRationalSymbol u0({{cplx(0.4, -0.8), cplx(-1.0, 1.0)},
                                     {cplx(-0.3, 0.6), cplx(1.5, 1.3)}});
        const FourierGrid g{40.0, quick ? 256 : 512};
        double worst_b = 0.0;
        for (int n = 1; n <= 3; ++n) worst_b = std::max(worst_b, antiselfadjoint_defect(op_b_n(g, u0, n)));
        vc.record("B_n anti-selfadjointness", worst_b <= 1e-10,
                  "worst defect " + std::to_string(worst_b));

        std::normal_distribution<double> n01(0.0, 1.0);
        double worst_r = 0.0, worst_a = 0.0;
        const Eigen::MatrixXcd l = op_lax(g, u0).a;
        for (int n : {1, 2}) {
            Eigen::MatrixXcd a = op_xstar(g).a - double(n + 1) * 0.7 * matrix_power(l, n);
            const GridOperator op{a, "A"};
            for (double imz : {0.5, 1.0, 2.0}) {
                for (int k = 0; k < (quick ? 5 : 15); ++k) {
                    GridFn rhs;
                    rhs.v.resize(g.m);
                    for (int j = 0; j < g.m; ++j) rhs.v(j) = cplx(n01(rng), n01(rng));
                    const auto sol = resolvent_solve(op, cplx(0.2, imz), rhs);
                    worst_r = std::max(worst_r, sol.h.norm_l2(g) * imz / rhs.norm_l2(g));
                    worst_a = std::max(worst_a, sol.residual);
                }
            }
        }
        vc.record("resolvent norm bound", worst_r <= 1.05,
                  "worst ||h|| Im z / ||rhs|| = " + std::to_string(worst_r));
        vc.record("resolvent back-substitution residual", worst_a <= 1e-10,
                  "worst " + std::to_string(worst_a));

        const auto c1 = commutator_check(u0, 1, FourierGrid{40.0, 256});
        const auto c2 = commutator_check(u0, 1, FourierGrid{40.0, 512});
        vc.record("commutator identity refinement", c2.rel_residual < c1.rel_residual &&
                                                        c2.rel_residual < 0.05,
                  "residual " + std::to_string(c1.rel_residual) + " -> " +
                      std::to_string(c2.rel_residual));
    }

    // one-soliton spectral anchors
    {
        const auto w = lax_symbols(RealRationalSymbol::soliton(cplx(0.0, 1.0)), 1);
        const double gap = (w[1] - w[0] * cplx(-0.5)).coeff_scale();
        vc.record("one-soliton eigen-relation (exact expansions)", gap <= 1e-13,
                  "coefficient gap " + std::to_string(gap));
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        json j{{"seed", seed}, {"quick", quick}, {"failures", vc.failures},
               {"checks", vc.results}};
        std::ofstream(std::filesystem::path(out_dir) / "verify.json") << j.dump(2) << "\n";
    }
    std::cout << (vc.failures == 0 ? "verify: all checks passed\n"
                                   : "verify: FAILURES present\n");
    return vc.failures == 0 ? kExitOk : kExitVerification;
}

int cmd_report(const std::string& in_dir, const std::string& out_file) {
    std::ostringstream rep;
    rep << "bolab report for " << in_dir << "\n";
    int found = 0;
    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        json j;
        try {
            in >> j;
        } catch (...) {
            continue;
        }
        ++found;
        rep << "\n== " << entry.path().filename().string() << " ==\n";
        if (j.contains("checks")) {
            for (const auto& c : j["checks"])
                rep << "  " << (c["pass"].get<bool>() ? "PASS " : "FAIL ")
                    << c["name"].get<std::string>() << ": " << c["detail"].get<std::string>()
                    << "\n";
        }
        if (j.contains("critical_abscissae")) {
            rep << "  critical abscissae:";
            for (const auto& x : j["critical_abscissae"]) rep << " " << x.get<double>();
            rep << "\n  first breaking time: " << j["first_breaking_time"].get<double>() << "\n";
        }
        if (j.contains("config_hash")) rep << "  config hash: " << j["config_hash"] << "\n";
    }
    rep << "\n" << found << " result files summarized\n";
    if (out_file.empty()) std::cout << rep.str();
    else std::ofstream(out_file) << rep.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benjamin-Ono hierarchy laboratory: zero-dispersion limits, solitons, "
                 "resolvents and small-dispersion simulation"};
    app.require_subcommand(1);

    std::string symbol_path, xrange = "-5:5:101", out_dir = ".", p_str = "0,1";
    std::string m_list = "512,1024", z_list = "0,1", snaps, eps_sweep, dump_path, in_dir, out_file;
    int n = 1, points = 2048, m = 1024, n_max = 3;
    double t = 0.0, xi = 0.0, eps = 0.1, length = 80.0, dt = 0.0, t_final = 1.0;
    double test_center = 0.0, test_width = 2.0, sweep_t = 0.0, eps_op = 0.0;
    std::uint64_t seed = 0;
    bool no_oracle = false, quick = false;

    auto* zd = app.add_subcommand("zd", "zero-dispersion scan with oracle columns");
    zd->add_option("--symbol", symbol_path, "symbol JSON file")->required();
    zd->add_option("--n", n, "flow index (n >= 1)");
    zd->add_option("--t", t, "time");
    zd->add_option("--x", xrange, "scan range min:max:count");
    zd->add_flag("--no-oracle", no_oracle, "skip the resolvent boundary oracle");
    zd->add_option("--out-dir", out_dir, "output directory");
    zd->add_option("--seed", seed, "seed recorded in outputs");

    auto* sol = app.add_subcommand("soliton", "spectrum, Wu residuals and velocities");
    sol->add_option("--p", p_str, "pole re,im with im > 0");
    sol->add_option("--n-max", n_max, "largest flow index in the velocity table");
    sol->add_option("--m-list", m_list, "comma list of grid sizes");
    sol->add_option("--xi", xi, "frequency cutoff (0 = auto)");
    sol->add_option("--out-dir", out_dir, "output directory");
    sol->add_option("--seed", seed, "seed recorded in outputs");

    auto* res = app.add_subcommand("resolvent", "explicit-formula and ZD resolvent tables");
    res->add_option("--symbol", symbol_path, "symbol JSON file")->required();
    res->add_option("--n", n, "flow index");
    res->add_option("--t", t, "time");
    res->add_option("--z", z_list, "semicolon list of re,im points with im > 0");
    res->add_option("--m", m, "grid size");
    res->add_option("--xi", xi, "frequency cutoff (0 = auto)");
    res->add_option("--eps", eps_op, "if > 0, evaluate the eps-dispersion resolvent");
    res->add_option("--dump-operator", dump_path, "write the Lax operator dump here");
    res->add_option("--out-dir", out_dir, "output directory");
    res->add_option("--seed", seed, "seed recorded in outputs");

    std::string sim_config_path;
    auto* sim = app.add_subcommand("simulate", "small-dispersion pseudospectral run");
    sim->add_option("--config", sim_config_path, "run-config JSON; explicit flags override");
    sim->add_option("--symbol", symbol_path, "symbol JSON file (omit for zero data)");
    sim->add_option("--n", n, "flow index (1 or 2)");
    sim->add_option("--eps", eps, "dispersion parameter");
    sim->add_option("--length", length, "domain half-length");
    sim->add_option("--points", points, "grid points (power of two)");
    sim->add_option("--dt", dt, "time step (0 = stability bound)");
    sim->add_option("--t-final", t_final, "final time");
    sim->add_option("--snap", snaps, "comma list of snapshot times");
    sim->add_option("--eps-sweep", eps_sweep, "comma list of eps for the weak-convergence study");
    sim->add_option("--test-center", test_center, "Gaussian test function center");
    sim->add_option("--test-width", test_width, "Gaussian test function width");
    sim->add_option("--sweep-t", sweep_t, "sweep comparison time (0 = 1.5x breaking time)");
    sim->add_option("--out-dir", out_dir, "output directory");
    sim->add_option("--seed", seed, "seed recorded in outputs");

    auto* ver = app.add_subcommand("verify", "property battery with pass/fail matrix");
    ver->add_option("--seed", seed, "RNG seed (default 0)");
    ver->add_flag("--quick", quick, "reduced instance counts");
    ver->add_option("--symbol", symbol_path, "optional fixture symbol to validate");
    ver->add_option("--out-dir", out_dir, "where to write verify.json");

    auto* rep = app.add_subcommand("report", "summarize result files from a directory");
    rep->add_option("--in", in_dir, "directory with bolab outputs")->required();
    rep->add_option("--out", out_file, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (zd->parsed())
            return cmd_zd(symbol_path, n, t, xrange, !no_oracle, out_dir, seed);
        if (sol->parsed()) return cmd_soliton(p_str, n_max, m_list, xi, out_dir, seed);
        if (res->parsed())
            return cmd_resolvent(symbol_path, n, t, z_list, m, xi, eps_op, dump_path, out_dir,
                                 seed);
        if (sim->parsed()) {
            if (!sim_config_path.empty()) {
                std::ifstream in(sim_config_path);
                if (!in) throw ConfigError("cannot open config: " + sim_config_path);
                json cj;
                in >> cj;
                const SimConfig base = sim_config_from_json(cj);
                if (sim->count("--n") == 0) n = base.n;
                if (sim->count("--eps") == 0) eps = base.eps;
                if (sim->count("--length") == 0) length = base.domain_half_length;
                if (sim->count("--points") == 0) points = base.grid_points;
                if (sim->count("--dt") == 0) dt = base.dt;
                if (sim->count("--t-final") == 0) t_final = base.t_final;
            }
            return cmd_simulate(symbol_path, n, eps, length, points, dt, t_final, snaps,
                                eps_sweep, test_center, test_width, sweep_t, out_dir, seed);
        }
        if (ver->parsed()) return cmd_verify(seed, quick, symbol_path, out_dir);
        if (rep->parsed()) return cmd_report(in_dir, out_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
