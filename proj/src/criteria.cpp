#include "epr/criteria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "epr/constants.hpp"

namespace epr {

std::vector<int> best_relabeling(const JointProbTable& t) {
    std::vector<int> sigma(t.d);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<int> best = sigma;
    double best_sum = correlated_sum(t, sigma);
    while (std::next_permutation(sigma.begin(), sigma.end())) {
        const double s = correlated_sum(t, sigma);
        if (s > best_sum) {
            best_sum = s;
            best = sigma;
        }
    }
    return best;
}

double correlated_sum(const JointProbTable& t, const std::vector<int>& sigma) {
    double s = 0.0;
    for (int n = 0; n < t.d; ++n) s += t.at(n, sigma[n]);
    return s;
}

WitnessResult mub_witness(const std::vector<JointProbTable>& tables) {
    if (tables.empty()) throw ValidationError("mub_witness: no tables");
    const int d = tables.front().d;
    WitnessResult w;
    for (const auto& t : tables) {
        if (t.d != d) throw ValidationError("mub_witness: tables have different outcome counts");
        w.labelings.push_back(best_relabeling(t));
        w.sum += correlated_sum(t, w.labelings.back());
    }
    const int M = static_cast<int>(tables.size());
    w.threshold = 1.0 + static_cast<double>(M - 1) / d;
    w.entangled = w.sum > w.threshold;
    return w;
}

namespace {

// 2×2 table with photon outcomes permuted so that the correlated entries sit on the diagonal.
std::array<double, 4> relabelled(const JointProbTable& t) {
    if (t.d != 2) throw ValidationError("fidelity bound requires d = 2 tables");
    const auto s = best_relabeling(t);
    return {t.at(0, s[0]), t.at(0, s[1]), t.at(1, s[0]), t.at(1, s[1])};
}

} // namespace

double fidelity_lower_bound(const JointProbTable& pos, const JointProbTable& mom) {
    const auto x = relabelled(pos);
    const auto p = relabelled(mom);
    return 0.5 * (x[0] + x[3] - 1.0) + (p[0] + p[3]) - std::sqrt(x[1] * x[2]);
}

FormationBound ef_lower_bound(double fidelity, const JointProbTable& pos) {
    const auto x = relabelled(pos);
    FormationBound b;
    b.I = std::max(0.0, (2.0 * fidelity - x[0] - x[3] - 2.0 * std::sqrt(x[1] * x[2])) / std::sqrt(2.0));
    if (b.I > 0.0) {
        b.ef = -std::log1p(-b.I * b.I);
        b.ef_log2 = b.ef / std::log(2.0);
    }
    return b;
}

double ppt_negativity(const std::vector<double>& axis, const std::vector<double>& f) {
    const std::size_t m = axis.size();
    if (m < 2 || f.size() != m * m) throw ValidationError("ppt_negativity: need an m x m grid with m >= 2");
    auto w = [&](std::size_t a) {
        const double left = a > 0 ? axis[a] - axis[a - 1] : 0.0;
        const double right = a + 1 < m ? axis[a + 1] - axis[a] : 0.0;
        return 0.5 * (left + right);
    };
    double acc = 0.0, trace = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        double row = 0.0;
        for (std::size_t b = a + 1; b < m; ++b) row += w(b) * std::abs(f[a * m + b]);
        acc += w(a) * row;
        trace += w(a) * f[a * m + a];
    }
    if (!(trace > 0.0)) throw ValidationError("ppt_negativity: kernel has no diagonal weight");
    return acc / trace;
}

double ppt_negativity(const MomentumKernel& K) {
    const int n = K.size();
    if (n < 2) throw ValidationError("ppt_negativity: kernel too small");
    // Full-axis nodes −k_{n−1} … k_{n−1}; f̃ depends on |k1|, |k2| only.
    const int m = 2 * n - 1;
    std::vector<double> axis(m), f(static_cast<std::size_t>(m) * m);
    auto q = [&](int a) { return std::abs(a - (n - 1)); };
    for (int a = 0; a < m; ++a) {
        axis[a] = (a < n - 1 ? -1.0 : 1.0) * K.k_axis[q(a)];
        for (int b = 0; b < m; ++b) f[static_cast<std::size_t>(a) * m + b] = K.at(q(a), q(b));
    }
    return ppt_negativity(axis, f);
}

double robustness_measure(double sigma_x, double sigma_p, double T_x) {
    if (sigma_x < 0.0 || sigma_p < 0.0) throw ValidationError("robustness_measure: sigmas must be >= 0");
    if (!(T_x > 0.0)) throw ValidationError("robustness_measure: T_x must be > 0");
    auto term = [](double S, double T) {
        if (S == 0.0) return 1.0;
        const double r = T / S;
        return 2.0 / std::sqrt(2.0 * kPi) / r * std::expm1(-0.5 * r * r) + std::erf(r / std::sqrt(2.0));
    };
    return term(sigma_x, T_x) + term(sigma_p, 4.0 * kPi / T_x);
}

std::optional<std::pair<double, double>> feasible_period_interval(double sigma_x, double sigma_p) {
    if (sigma_x < 0.0 || sigma_p < 0.0) throw ValidationError("feasible_period_interval: sigmas must be >= 0");
    if (!(sigma_p > 0.0)) throw ValidationError("feasible_period_interval: sigma_p must be > 0");
    const double disc = 1.0 - sigma_x * sigma_p / kRobustnessA;
    if (disc < 0.0) return std::nullopt;
    const double c = 2.0 * std::sqrt(kPi * kRobustnessA) / sigma_p;
    const double r = std::sqrt(disc);
    return std::make_pair(c * (1.0 - r), c * (1.0 + r));
}

CertificationReport certify(const JointProbTable& pp, const JointProbTable& xx, const JointProbTable& xp,
                            const JointProbTable& px, std::optional<double> negativity) {
    CertificationReport r;
    r.pp = pp;
    r.xx = xx;
    r.xp = xp;
    r.px = px;
    r.witness = mub_witness({xx, pp});
    r.fidelity = fidelity_lower_bound(xx, pp);
    r.formation = ef_lower_bound(r.fidelity, xx);
    r.negativity = negativity;
    for (const auto* t : {&xp, &px})
        for (double v : t->p) r.mixed_max_deviation = std::max(r.mixed_max_deviation, std::abs(v - 1.0 / (t->d * t->d)));
    r.entangled_witness = r.witness.entangled;
    r.entangled_fidelity = r.fidelity > 0.5;
    r.entangled_negativity = negativity && *negativity > 0.0;
    return r;
}

} // namespace epr
