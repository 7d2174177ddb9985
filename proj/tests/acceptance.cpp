// End-to-end acceptance checks; one PASS/FAIL line per criterion.
#include <gsl/gsl_cdf.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "epr/cherenkov_kernel.hpp"
#include "epr/constants.hpp"
#include "epr/criteria.hpp"
#include "epr/deflection.hpp"
#include "epr/optimizer.hpp"
#include "epr/pipeline.hpp"

using namespace epr;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, double seconds) {
    std::printf("criterion %2d %s  %s: %s (%.1f s)\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void run(int id, const std::string& what, const std::function<bool(std::string&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, ok, what, detail, s);
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

JointDensity product_density(Basis basis, double half, int n, double me, double se, double mg, double sg) {
    JointDensity d;
    d.e = {basis, "e", "", -half, half, n};
    d.g = {basis, "g", "", -half, half, n};
    const double h = d.e.h();
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const double lo = -half + i * h, hi = lo + h;
        a[i] = Phi((hi - me) / se) - Phi((lo - me) / se);
        b[i] = Phi((hi - mg) / sg) - Phi((lo - mg) / sg);
    }
    d.mass.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d.mass[static_cast<std::size_t>(i) * n + j] = a[i] * b[j];
    return d;
}

double bisect_measure(double sx, double sp, double lo, double hi) {
    auto g = [&](double T) { return robustness_measure(sx, sp, T) - 1.5; };
    double glo = g(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

int main() {
    const PhysicalScenario ref = reference_scenario();
    std::printf("reference scenario: L_z = %g um, n = %g, beta = %g, window [%g, %g] eV\n", ref.L_z, ref.n_refr,
                ref.beta(), ref.E_min, ref.E_max);

    run(1, "characteristic angles", [&](std::string& d) {
        const auto a = characteristic_angles(0.7, 1.6);
        const double cr = a.theta_cr * 180.0 / kPi, crit = a.theta_crit * 180.0 / kPi;
        d = fmt("theta_CR = %.4f deg (26.77 +- 0.05), theta_crit = %.4f deg (38.7 +- 0.1)", cr, crit);
        return within(cr, 26.77, 0.05) && within(crit, 38.7, 0.1);
    });

    run(2, "emission normalisability", [&](std::string& d) {
        // The stated window edges k L_z = 6.2 / 7.1, integrated per unit azimuth.
        ProfileOptions po;
        po.kl_min = 6.2;
        po.kl_max = 7.1;
        po.full_azimuth = false;
        const auto P = emission_profile(ref, po);
        const auto full = emission_profile(ref);
        d = fmt("P_out = %.4g (5.65e-5 +- 5%%); with kL = n w L/c = [%.3f, %.3f] over the full azimuth: %.4g",
                P.p_out_total, full.kl_min, full.kl_max, full.p_out_total);
        return within(P.p_out_total, 5.65e-5, 0.05 * 5.65e-5);
    });

    std::printf("building reference kernel (%d x %d nodes) ...\n", ref.grid.n_kx, ref.grid.n_kx);
    KernelBuildReport build;
    const MomentumKernel K = build_kernel(ref, &build);
    std::printf("kernel: %d elements, %d not converged, max halving change %.2e\n", build.elements,
                build.not_converged, build.max_rel_change);

    run(3, "ideal-detector tables at T_x = 10 um", [&](std::string& d) {
        RunManifest m;
        m.T_x = 10.0;
        const auto r = run_certify(m, K).report;
        const double pp0 = r.pp.at(0, 0), pp1 = r.pp.at(1, 1);
        const double xx0 = r.xx.at(0, 0), xx1 = r.xx.at(1, 1);
        d = fmt("T_p = %.4f; p-p diag %.4f %.4f (0.500 +- 0.005); mixed max |P-1/4| %.2e (<= 0.005); x-x diag "
                "%.4f %.4f (>= 0.45)",
                4.0 * kPi / 10.0, pp0, pp1, r.mixed_max_deviation, xx0, xx1);
        return within(pp0, 0.5, 0.005) && within(pp1, 0.5, 0.005) && r.mixed_max_deviation <= 0.005 && xx0 >= 0.45 &&
               xx1 >= 0.45;
    });

    run(4, "blurred optimised pipeline", [&](std::string& d) {
        RunManifest m;
        m.resolution = ResolutionProfile::experimental();
        m.optimize = true;
        m.optimizer.Tx_lo = 1.0;
        m.optimizer.Tx_hi = 40.0;
        const auto r = run_certify(m, K);
        const auto& c = r.report;
        const double pp = 0.5 * (c.pp.at(0, 0) + c.pp.at(1, 1)), xx = 0.5 * (c.xx.at(0, 0) + c.xx.at(1, 1));
        RunManifest at = m;
        at.optimize = false;
        at.T_x = 5.44;
        const auto fixed = run_certify(at, K).report;
        d = fmt("T_x = %.3f (5.44 +- 5%%), T_p = %.3f (2.31 +- 5%%), p-p %.4f (0.421 +- 0.010), x-x %.4f "
                "(0.389 +- 0.010), sum %.4f (1.620 +- 0.020), F %.4f (0.620 +- 0.020), E_F %.4f (>= 0.025); "
                "at T_x = 5.44: p-p %.4f, x-x %.4f, sum %.4f",
                r.T_x, r.T_p, pp, xx, c.witness.sum, c.fidelity, c.formation.ef, 0.5 * (fixed.pp.at(0, 0) + fixed.pp.at(1, 1)),
                0.5 * (fixed.xx.at(0, 0) + fixed.xx.at(1, 1)), fixed.witness.sum);
        return within(r.T_x, 5.44, 0.05 * 5.44) && within(r.T_p, 2.31, 0.05 * 2.31) && within(pp, 0.421, 0.010) &&
               within(xx, 0.389, 0.010) && within(c.witness.sum, 1.620, 0.020) && c.witness.sum > 1.5 &&
               within(c.fidelity, 0.620, 0.020) && c.fidelity > 0.5 && c.formation.ef >= 0.025;
    });

    run(5, "PPT negativity", [&](std::string& d) {
        const double nk = ppt_negativity(K);
        // Diagonal kernel on the full signed axis.
        const int n = 2 * K.size() - 1;
        std::vector<double> axis(n), diag(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            axis[i] = -K.kmax() + i * K.dk();
            diag[static_cast<std::size_t>(i) * n + i] = K.diagonal(axis[i]) + 1e-3;
        }
        const double nd = ppt_negativity(axis, diag);
        d = fmt("kernel %.6g (> 0), diagonal kernel %.3g (== 0)", nk, nd);
        return nk > 0.0 && nd == 0.0;
    });

    run(6, "unbiasedness", [&](std::string& d) {
        ProbeSpec spec;
        spec.n_probes = 5;
        const auto r = verify_unbiasedness(MubPair::from_position_period(10.0), spec);
        const double red = 100.0 * r.entropy_reduction;
        d = fmt("max |P-1/2| %.2e (< 1e-2), single slit %.3f, entropy reduction %.3f%% (0.8 +- 0.3)", r.max_deviation,
                r.slit_deviation, red);
        return r.max_deviation < 1e-2 && within(red, 0.8, 0.3);
    });

    run(7, "robustness closed form", [&](std::string& d) {
        const double m00 = robustness_measure(0.0, 0.0, 5.0);
        const double sp = 0.8, sx = kRobustnessA / sp;
        const double Tdeg = 2.0 * std::sqrt(kPi * kRobustnessA) / sp;
        const double mb = robustness_measure(sx, sp, Tdeg);
        std::mt19937_64 rng(20251);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double sx_i = std::exp(std::log(0.1) + U(rng) * std::log(30.0));
            const double prod = kRobustnessA * (0.02 + 0.96 * U(rng));
            const double sp_i = prod / sx_i;
            const auto iv = feasible_period_interval(sx_i, sp_i);
            if (!iv) return d = "interval missing below the bound", false;
            const double T0 = 2.0 * std::sqrt(kPi * kRobustnessA) / sp_i;
            if (robustness_measure(sx_i, sp_i, T0) < 1.5) return d = "measure below 1.5 at the interval centre", false;
            const double lo = bisect_measure(sx_i, sp_i, T0 * 1e-4, T0);
            const double hi = bisect_measure(sx_i, sp_i, T0, T0 * 1e4);
            worst = std::max({worst, std::abs(iv->first / lo - 1.0), std::abs(iv->second / hi - 1.0)});
        }
        d = fmt("M(0,0) = %.17g (== 2), boundary M = %.4f (1.5 +- 0.01), worst endpoint mismatch vs bisection %.2f%% "
                "(<= 1%%)",
                m00, mb, 100.0 * worst);
        return m00 == 2.0 && within(mb, 1.5, 0.01) && worst <= 0.01;
    });

    run(8, "separability soundness", [&](std::string& d) {
        std::mt19937_64 rng(8080);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const double se = 0.2 + 2.8 * U(rng), sg = 0.2 + 2.8 * U(rng);
            const double xe = 6.0 * U(rng) - 3.0, xg = 6.0 * U(rng) - 3.0;
            const double pe = 4.0 * U(rng) - 2.0, pg = 4.0 * U(rng) - 2.0;
            const double T = 2.0 * std::pow(10.0, U(rng));
            const auto pair = MubPair::from_position_period(T, 2, 1, 10.0 * U(rng), 3.0 * U(rng));
            const auto xx = product_density(Basis::Position, 40.0, 1600, xe, se, xg, sg);
            const auto pp = product_density(Basis::Momentum, 20.0, 2000, pe, 0.5 / se, pg, 0.5 / sg);
            const auto w = mub_witness({joint_probabilities(xx, pair.pos, pair.pos), joint_probabilities(pp, pair.mom, pair.mom)});
            worst = std::max(worst, w.sum);
        }
        d = fmt("largest witness sum over 20 product states %.6f (<= 1.5 + 1e-6)", worst);
        return worst <= 1.5 + 1e-6;
    });

    run(9, "oracle equivalence", [&](std::string& d) {
        // Kernel elements vs fixed quadrature at 4x resolution.
        double kern = 0.0;
        for (auto [a, b] : {std::pair{0.0, 0.0}, {3.0, 4.0}, {8.0, 8.0}, {10.0, 12.5}, {15.0, 16.0}, {5.0, 9.0}}) {
            const auto e = kernel_element(a, b, ref);
            const double o = kernel_element_fixed(a, b, ref, 4 * (e.n_ky - 1) + 1, 4 * (e.n_kz - 1) + 1);
            kern = std::max(kern, std::abs(e.value - o) / std::abs(o));
        }
        // Position profile vs midpoint Riemann sum at 4x momentum resolution.
        const int m = 4 * (K.size() - 1);
        const double h = K.kmax() / m;
        std::vector<double> kk(2 * m);
        for (int i = 0; i < 2 * m; ++i) kk[i] = -K.kmax() + (i + 0.5) * h;
        const double p0 = xx_profile_unnormalised(K, 0.0);
        double prof = 0.0;
        for (double s : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0}) {
            double acc = 0.0;
            for (double a : kk)
                for (double b : kk) acc += K.mirrored(a, b) * std::cos((a - b) * s);
            acc *= h * h;
            prof = std::max(prof, std::abs(xx_profile_unnormalised(K, s) - acc) / std::max(std::abs(acc), 0.05 * p0));
        }
        // Deflection marginal vs 10^6-sample Monte Carlo of the energy window (chi-square).
        const auto ctx = KinematicContext::from_scenario(ref);
        const double pg = characteristic_angles(ref).theta_cr;
        const double ea = electron_angle_from_photon(pg, ctx.E_min, ctx), eb = electron_angle_from_photon(pg, ctx.E_min + ctx.dE, ctx);
        const double lo = std::min(ea, eb), hi = std::max(ea, eb);
        const int bins = 40, N = 1000000;
        std::vector<double> hist(bins, 0.0);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> E(ctx.E_min, ctx.E_min + ctx.dE);
        for (int i = 0; i < N; ++i) {
            const double pe = electron_angle_from_photon(pg, E(rng), ctx);
            hist[std::min(bins - 1, static_cast<int>((pe - lo) / (hi - lo) * bins))] += 1.0;
        }
        double chi2 = 0.0;
        const double hb = (hi - lo) / bins;
        for (int k = 0; k < bins; ++k) {
            double mass = 0.0;
            for (int t = 0; t < 400; ++t) mass += joint_angle_density(lo + (k + (t + 0.5) / 400) * hb, pg, ctx) * hb / 400;
            const double expct = mass * N;
            chi2 += (hist[k] - expct) * (hist[k] - expct) / expct;
        }
        const double pval = gsl_cdf_chisq_Q(chi2, bins - 1);
        d = fmt("kernel vs 4x quadrature %.2f%% (<= 1%%); x-x profile vs Riemann sum %.2f%% (<= 1%%); deflection "
                "marginal chi2 = %.1f on %d dof, p = %.3f (> 0.001)",
                100.0 * kern, 100.0 * prof, chi2, bins - 1, pval);
        return kern <= 0.01 && prof <= 0.01 && pval > 1e-3;
    });

    run(10, "deflection scale", [&](std::string& d) {
        const auto ctx = KinematicContext::from_scenario(ref);
        const double pe = electron_angle_from_photon(characteristic_angles(ref).theta_cr, 3.75, ctx);
        d = fmt("phi_e = %.3f urad at theta_CR, 3.75 eV (|phi_e| in [1, 10] urad)", 1e6 * pe);
        return std::abs(pe) >= 1e-6 && std::abs(pe) <= 10e-6;
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
