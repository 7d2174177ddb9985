#include "epr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <fftw3.h>

#include "epr/constants.hpp"
#include "epr/criteria.hpp"

namespace epr {

WitnessDensities witness_densities(const MomentumKernel& K, const ResolutionProfile& r, double x_max,
                                   const DensityOptions& opt) {
    WitnessDensities w;
    w.pp = apply_psf(density_pp(K), r, opt.n_p);
    w.xx = apply_psf(density_xx(K, x_max, opt), r);
    return w;
}

namespace {

double basis_score(const JointDensity& d, const PeriodicBinning& b, const BinningOptions& opt) {
    const auto t = joint_probabilities(d, b, b, opt);
    return correlated_sum(t, best_relabeling(t));
}

// Best center for one basis: coarse scan over one period, then a parabolic step.
std::pair<double, double> best_center(const JointDensity& d, double T, int n_phase,
                                      const BinningOptions& opt) {
    auto score = [&](double c) { return basis_score(d, PeriodicBinning(T, 2, c), opt); };
    const double step = T / n_phase;
    std::vector<double> s(n_phase);
    int best = 0;
    for (int i = 0; i < n_phase; ++i) {
        s[i] = score(i * step);
        if (s[i] > s[best]) best = i;
    }
    double c_best = best * step, s_best = s[best];
    const double f0 = s[(best + n_phase - 1) % n_phase], f1 = s[best], f2 = s[(best + 1) % n_phase];
    const double denom = f0 - 2.0 * f1 + f2;
    if (denom < 0.0) {
        const double off = 0.5 * (f0 - f2) / denom;
        if (std::abs(off) < 1.0 && off != 0.0) {
            const double c = c_best + off * step;
            const double v = score(c);
            if (v > s_best) {
                s_best = v;
                c_best = c;
            }
        }
    }
    return {c_best, s_best};
}

} // namespace

double witness_objective(const WitnessDensities& w, double T_x, double x_center, double p_center,
                         const BinningOptions& opt) {
    const auto pair = MubPair::from_position_period(T_x, 2, 1, x_center, p_center);
    return basis_score(w.xx, pair.pos, opt) + basis_score(w.pp, pair.mom, opt);
}

OptimizationResult optimize_periods(const WitnessDensities& w, const OptimizerOptions& opt) {
    if (!(opt.Tx_lo > 0.0) || !(opt.Tx_hi > opt.Tx_lo))
        throw ValidationError("optimize_periods: search bounds must satisfy 0 < Tx_lo < Tx_hi");
    if (opt.n_starts < 1 || opt.n_phase < 3) throw ValidationError("optimize_periods: bad search settings");
    OptimizationResult res;
    res.objective = -1.0;

    struct Eval {
        double value, xc, pc;
    };
    auto evaluate = [&](double logT) {
        const double T_x = std::exp(logT);
        const double T_p = 4.0 * kPi / T_x;
        Eval e{0.0, 0.0, 0.0};
        if (opt.optimize_centers) {
            auto [xc, xs] = best_center(w.xx, T_x, opt.n_phase, opt.binning);
            auto [pc, ps] = best_center(w.pp, T_p, opt.n_phase, opt.binning);
            e = {xs + ps, xc, pc};
        } else {
            e.value = witness_objective(w, T_x, 0.0, 0.0, opt.binning);
        }
        res.trace.push_back({T_x, T_p, e.value});
        if (e.value > res.objective) {
            res.objective = e.value;
            res.best_Tx = T_x;
            res.best_Tp = T_p;
            res.x_center = e.xc;
            res.p_center = e.pc;
        }
        return e.value;
    };

    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    const double L0 = std::log(opt.Tx_lo), L1 = std::log(opt.Tx_hi);
    for (int s = 0; s < opt.n_starts; ++s) {
        double a = L0 + (L1 - L0) * s / opt.n_starts;
        double b = L0 + (L1 - L0) * (s + 1) / opt.n_starts;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = evaluate(c), fd = evaluate(d);
        while (b - a > opt.log_tol) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = evaluate(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = evaluate(d);
            }
        }
    }
    res.certification_possible = res.objective > 1.5;
    return res;
}

// ---- unbiasedness ----

std::vector<double> gaussian_outcomes(double mu, double sigma, const PeriodicBinning& b) {
    std::vector<double> p(b.d, 0.0);
    if (!(sigma > 0.0)) {
        p[b.outcome(mu)] = 1.0;
        return p;
    }
    auto Phi = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0))); };
    const double w = b.width();
    const double lo = mu - 10.0 * sigma, hi = mu + 10.0 * sigma;
    double edge = b.center + std::floor((lo - b.center) / w) * w;
    for (; edge < hi; edge += w) {
        const int n = b.outcome(edge + 0.5 * w);
        p[n] += Phi(edge + w) - Phi(edge);
    }
    double tot = 0.0;
    for (double v : p) tot += v;
    for (double& v : p) v /= tot;
    return p;
}

double projection_entropy(double T_x, double perturbation, const ProbeSpec& spec) {
    const double periods = std::round(spec.domain / T_x);
    const double L = periods * T_x;
    const int N = static_cast<int>(std::round(L / spec.dx));
    const double dx = L / N;
    const auto pair = MubPair::from_position_period(T_x);
    const PeriodicBinning xb = pair.pos;
    const PeriodicBinning pb(pair.mom.T * (1.0 + perturbation), 2, -0.25 * pair.mom.T * (1.0 + perturbation));
    const double x0 = xb.center + 0.5 * xb.width();  // middle of position element 0
    const int n0 = xb.outcome(x0);

    std::vector<std::complex<double>> psi(N);
    for (int i = 0; i < N; ++i) {
        const double x = -0.5 * L + i * dx;
        psi[i] = xb.outcome(x) == n0 ? std::exp(-(x - x0) * (x - x0) / (4.0 * spec.entropy_sigma * spec.entropy_sigma)) : 0.0;
    }
    auto* data = reinterpret_cast<fftw_complex*>(psi.data());
    fftw_plan fwd = fftw_plan_dft_1d(N, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_1d(N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    // Keep the momentum element that contains p = 0.
    const int m0 = pb.outcome(0.0);
    for (int k = 0; k < N; ++k) {
        const int kk = k <= N / 2 ? k : k - N;
        const double p = 2.0 * kPi * kk / L;
        if (pb.outcome(p) != m0) psi[k] = 0.0;
    }
    fftw_execute(bwd);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);

    std::vector<double> q(xb.d, 0.0);
    for (int i = 0; i < N; ++i) q[xb.outcome(-0.5 * L + i * dx)] += std::norm(psi[i]);
    double tot = 0.0;
    for (double v : q) tot += v;
    double H = 0.0;
    for (double v : q)
        if (v > 0.0) H -= (v / tot) * std::log(v / tot);
    return H;
}

UnbiasednessReport verify_unbiasedness(const MubPair& pair, const ProbeSpec& spec) {
    pair.check();
    UnbiasednessReport r;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = pair.pos.d;

    for (double phase : {0.0, 0.5}) {
        const PeriodicBinning xb(pair.pos.T, d, pair.pos.center + phase * pair.pos.width());
        const PeriodicBinning pb(pair.mom.T, d, pair.mom.center + phase * pair.mom.width());
        for (int i = 0; i < spec.n_probes; ++i) {
            // A Gaussian probe centred in one element of one basis, with a random
            // centre in the conjugate variable; its conjugate spread is 1/(2σ).
            const double conj_x = (unit(rng) - 0.5) * 20.0 * xb.T;
            const double conj_p = (unit(rng) - 0.5) * 20.0 * pb.T;
            const double sx = spec.width_fraction * xb.width();
            for (double v : gaussian_outcomes(conj_p, 1.0 / (2.0 * sx), pb))
                r.max_deviation = std::max(r.max_deviation, std::abs(v - 1.0 / d));
            const double sp = spec.width_fraction * pb.width();
            for (double v : gaussian_outcomes(conj_x, 1.0 / (2.0 * sp), xb))
                r.max_deviation = std::max(r.max_deviation, std::abs(v - 1.0 / d));
        }
    }
    // Single-window position projector of the same width as one bin: a momentum-
    // localized probe lands inside it far less often than 1/d.
    {
        const double sp = spec.width_fraction * pair.mom.width();
        const double sx = 1.0 / (2.0 * sp);
        const double w = pair.pos.width();
        const double inside = std::erf(0.5 * w / (std::sqrt(2.0) * sx));
        r.slit_deviation = std::max(std::abs(inside - 1.0 / d), std::abs((1.0 - inside) - (1.0 - 1.0 / d)));
    }
    r.entropy_exact = projection_entropy(spec.entropy_Tx, 0.0, spec);
    r.entropy_perturbed = projection_entropy(spec.entropy_Tx, spec.perturbation, spec);
    r.entropy_reduction = 1.0 - r.entropy_perturbed / std::log(static_cast<double>(d));
    return r;
}

} // namespace epr
