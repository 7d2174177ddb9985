#include <cmath>

#include "doctest.h"
#include "epr/constants.hpp"
#include "epr/criteria.hpp"
#include "epr/optimizer.hpp"
#include "fixtures.hpp"

using namespace epr;

namespace {

DensityOptions coarse_density() {
    DensityOptions o;
    o.n_x = fixtures::coarse_scenario().grid.n_x;
    return o;
}

const WitnessDensities& ideal_densities() {
    static const WitnessDensities w =
        witness_densities(fixtures::coarse_kernel(), ResolutionProfile::ideal(), 60.0, coarse_density());
    return w;
}

// Correlated densities that are infinitely wide along the ridge with Gaussian
// widths Σ_x, Σ_p across it.
WitnessDensities gaussian_ridge_densities(double sigma_x, double sigma_p) {
    WitnessDensities w;
    JointDensity& xx = w.xx;
    xx.e = {Basis::Position, "x_e", "um", -200.0, 200.0, 1};
    xx.g = xx.e;
    const double ds = 0.002;
    for (int q = 0; q * ds < 8.0 * sigma_x; ++q) {
        xx.profile_s.push_back(q * ds);
        xx.profile.push_back(std::exp(-0.5 * q * ds * q * ds / (sigma_x * sigma_x)) / (std::sqrt(2.0 * kPi) * sigma_x));
    }
    JointDensity ridge;
    ridge.e = {Basis::Momentum, "p_e", "hbar/um", -30.0, 30.0, 0};
    ridge.g = ridge.e;
    Ridge r;
    for (int i = 0; i <= 300; ++i) {
        r.k_nodes.push_back(0.1 * i);
        r.weight.push_back(1.0 / 60.0);
    }
    ridge.ridge = r;
    const double fwhm = sigma_p / std::sqrt(2.0) * kFwhmPerSigma;
    w.pp = apply_psf(ridge, {0.0, fwhm, 0.0, fwhm}, 3001);
    return w;
}

} // namespace

TEST_CASE("period search on the ideal-detector densities") {
    const auto& w = ideal_densities();
    OptimizerOptions opt;
    const auto r = optimize_periods(w, opt);
    CHECK(r.best_Tx * r.best_Tp == doctest::Approx(4.0 * kPi).epsilon(1e-12));
    for (const auto& row : r.trace) CHECK(std::abs(row.T_x * row.T_p - 4.0 * kPi) <= 1e-12 * 4.0 * kPi);
    CHECK(r.best_Tx >= opt.Tx_lo);
    CHECK(r.best_Tx <= opt.Tx_hi);
    // The reported objective is what a fresh evaluation at the optimum gives.
    CHECK(std::abs(witness_objective(w, r.best_Tx, r.x_center, r.p_center) - r.objective) < 1e-9);
    // Never worse than the fixed T_x = 10 μm, p = 0-centred pattern.
    CHECK(r.objective >= witness_objective(w, 10.0, 0.0, -kPi / 10.0) - 1e-12);
    CHECK(r.certification_possible);

    SUBCASE("deterministic") {
        const auto again = optimize_periods(w, opt);
        REQUIRE(again.trace.size() == r.trace.size());
        for (std::size_t i = 0; i < r.trace.size(); ++i) CHECK(again.trace[i].objective == r.trace[i].objective);
        CHECK(again.objective == r.objective);
    }
    SUBCASE("mixed tables stay uniform at the optimum") {
        const auto& K = fixtures::coarse_kernel();
        const auto pair = MubPair::from_position_period(r.best_Tx, 2, 1, r.x_center, r.p_center);
        const auto xp = density_mixed(K, MixedKind::XePg, 60.0, coarse_density());
        const auto px = density_mixed(K, MixedKind::PeXg, 60.0, coarse_density());
        for (double v : joint_probabilities(xp, pair.pos, pair.mom).p) CHECK(std::abs(v - 0.25) < 1e-3);
        for (double v : joint_probabilities(px, pair.mom, pair.pos).p) CHECK(std::abs(v - 0.25) < 1e-3);
    }
    SUBCASE("fixed centres") {
        OptimizerOptions o2 = opt;
        o2.optimize_centers = false;
        const auto f = optimize_periods(w, o2);
        CHECK(f.objective <= r.objective + 1e-9);
        CHECK(f.x_center == 0.0);
    }
    CHECK_THROWS_AS(optimize_periods(w, OptimizerOptions{5.0, 2.0}), ValidationError);
}

TEST_CASE("optimum for Gaussian-ridge densities lies in the feasible period interval") {
    // Two-outcome periodic elements are T_x/2 wide, so the binned witness can only
    // exceed 1.5 for Σ_xΣ_p below roughly a/4; these pairs sit in that region.
    for (auto [sx, sp] : {std::pair{0.5, 0.5}, {0.3, 0.9}, {1.0, 0.25}}) {
        const auto w = gaussian_ridge_densities(sx, sp);
        OptimizerOptions opt;
        opt.Tx_lo = 0.3;
        opt.Tx_hi = 60.0;
        opt.optimize_centers = false;
        const auto r = optimize_periods(w, opt);
        const auto iv = feasible_period_interval(sx, sp);
        REQUIRE(iv);
        INFO("sigma = ", sx, ", ", sp, " optimum ", r.best_Tx, " interval ", iv->first, " .. ", iv->second);
        CHECK(r.objective > 1.5);
        CHECK(r.best_Tx > iv->first);
        CHECK(r.best_Tx < iv->second);
        // The balanced point T_x/Σ_x = T_p/Σ_p.
        CHECK(r.best_Tx == doctest::Approx(std::sqrt(4.0 * kPi * sx / sp)).epsilon(0.15));
    }
}

TEST_CASE("binned witness is stricter than the closed-form feasibility region") {
    // Σ_xΣ_p = 0.36 has a closed-form interval but no period where the
    // two-outcome witness reaches 1.5.
    const auto w = gaussian_ridge_densities(0.3, 1.2);
    REQUIRE(feasible_period_interval(0.3, 1.2));
    for (double T : {0.5, 1.0, 1.77, 3.0, 6.0, 20.0, 60.0}) CHECK(witness_objective(w, T, 0.0, 0.0) < 1.5);
}

TEST_CASE("Gaussian outcome probabilities") {
    const PeriodicBinning b(2.0, 2, 0.3);
    const auto narrow = gaussian_outcomes(0.8, 1e-4, b);
    CHECK(narrow[0] == doctest::Approx(1.0));
    const auto delta = gaussian_outcomes(1.5, 0.0, b);
    CHECK(delta[1] == 1.0);
    const auto wide = gaussian_outcomes(0.1, 5.0, b);
    CHECK(std::abs(wide[0] - 0.5) < 1e-9);
    CHECK(wide[0] + wide[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conjugate periodic bases are unbiased") {
    const auto pair = MubPair::from_position_period(10.0);
    ProbeSpec spec;
    const auto r = verify_unbiasedness(pair, spec);
    CHECK(r.max_deviation < 1e-2);
    // A single slit is strongly biased.
    CHECK(r.slit_deviation > 0.1);
    // Exact periods keep the sequential-projection outcome distribution uniform.
    CHECK(r.entropy_exact == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(r.entropy_perturbed < r.entropy_exact);
    CHECK(r.entropy_reduction > 0.0);

    SUBCASE("a mismatched pair is rejected") {
        MubPair bad = pair;
        bad.mom.T *= 1.2;
        CHECK_THROWS_AS(verify_unbiasedness(bad, spec), ValidationError);
    }
}
