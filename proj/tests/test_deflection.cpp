#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "epr/cherenkov_kernel.hpp"
#include "epr/constants.hpp"
#include "epr/deflection.hpp"

using namespace epr;

namespace {

KinematicContext reference_context() { return KinematicContext::from_scenario(reference_scenario()); }

} // namespace

TEST_CASE("electron deflection from photon angle") {
    const auto ctx = reference_context();
    CHECK(ctx.E_i == doctest::Approx(711e3));
    CHECK(ctx.beta == 0.7);
    CHECK(electron_angle_from_photon(0.0, 3.75, ctx) == 0.0);
    for (double pg : {0.1, 0.4, 1.2}) CHECK(electron_angle_from_photon(-pg, 3.75, ctx) == -electron_angle_from_photon(pg, 3.75, ctx));
    const double th = characteristic_angles(0.7, 1.6).theta_cr;
    const double pe = electron_angle_from_photon(th, 3.75, ctx);
    CHECK(pe * 1e6 == doctest::Approx(-5.43).epsilon(0.005));
    CHECK_THROWS_AS(electron_angle_from_photon(0.5 * kPi, 3.75, ctx), ValidationError);
    // Consistent energy inverts the map.
    CHECK(consistent_photon_energy(pe, th, ctx) == doctest::Approx(3.75).epsilon(1e-9));
    CHECK(std::isnan(consistent_photon_energy(1e-6, 0.3, ctx)));
}

TEST_CASE("windowed joint angle density") {
    const auto ctx = reference_context();
    const double pg = 0.4;
    SUBCASE("vanishes when both angles have the same sign") {
        CHECK(joint_angle_density(2e-6, pg, ctx) == 0.0);
        CHECK(joint_angle_density(-2e-6, -pg, ctx) == 0.0);
    }
    SUBCASE("normalised over its support") {
        for (double g : {0.05, 0.4, -0.9, 1.3}) CHECK(conditional_norm(g, ctx) == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("density sits on the mid-window deflection") {
        const double mid = electron_angle_from_photon(pg, ctx.E_min + 0.5 * ctx.dE, ctx);
        const double mean = conditional_mean(pg, ctx);
        CHECK(std::abs(mean - mid) < 1e-3 * std::abs(mid));
        CHECK(joint_angle_density(mid, pg, ctx) > 0.0);
        const double outside = electron_angle_from_photon(pg, ctx.E_min + 1.2 * ctx.dE, ctx);
        CHECK(joint_angle_density(outside, pg, ctx) == 0.0);
    }
    SUBCASE("marginal agrees with a Monte Carlo push-forward of the energy window") {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> E(ctx.E_min, ctx.E_min + ctx.dE);
        const double a = electron_angle_from_photon(pg, ctx.E_min, ctx);
        const double b = electron_angle_from_photon(pg, ctx.E_min + ctx.dE, ctx);
        const double lo = std::min(a, b), hi = std::max(a, b);
        const int bins = 40, N = 1000000;
        std::vector<double> hist(bins, 0.0);
        for (int i = 0; i < N; ++i) {
            const double pe = electron_angle_from_photon(pg, E(rng), ctx);
            const int k = std::min(bins - 1, static_cast<int>((pe - lo) / (hi - lo) * bins));
            hist[k] += 1.0;
        }
        const double h = (hi - lo) / bins;
        for (int k = 0; k < bins; ++k) {
            // Cell mass of the closed-form density, fine midpoint rule.
            double mass = 0.0;
            const int m = 200;
            for (int t = 0; t < m; ++t) mass += joint_angle_density(lo + (k + (t + 0.5) / m) * h, pg, ctx) * h / m;
            const double p = hist[k] / N;
            const double se = std::sqrt(mass * (1 - mass) / N);
            INFO("bin ", k, " mc ", p, " density ", mass);
            CHECK(std::abs(p - mass) < 3.0 * se + 1e-12);
        }
    }
    SUBCASE("narrow windows converge to the monochromatic deflection") {
        double last = 1e9;
        for (double dE : {0.5, 0.1, 0.02}) {
            KinematicContext c = ctx;
            c.E_min = 3.75 - 0.5 * dE;
            c.dE = dE;
            const double dev = std::abs(conditional_mean(pg, c) - electron_angle_from_photon(pg, 3.75, c));
            CHECK(dev < last);
            last = dev;
        }
    }
    SUBCASE("monochromatic form is rejected here") {
        KinematicContext c = ctx;
        c.dE = 0.0;
        CHECK_THROWS_AS(joint_angle_density(-1e-6, pg, c), ValidationError);
    }
}

TEST_CASE("angle density grid") {
    const auto ctx = reference_context();
    const double d2r = kPi / 180.0;
    const auto g = angle_density_grid(ctx, -80 * d2r, 80 * d2r, 81, -20e-6, 20e-6, 101);
    const double hg = 160 * d2r / 81, he = 40e-6 / 101;
    double tot = 0.0;
    for (double v : g.density) {
        CHECK(v >= 0.0);
        tot += v * hg * he;
    }
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
    // Rows conserve their share: every row carries the same mass when the support fits.
    KinematicContext mono = ctx;
    mono.dE = 0.0;
    const auto r = angle_density_grid(mono, -0.5, 0.5, 10, -20e-6, 20e-6, 50);
    for (int i = 0; i < 10; ++i) {
        int nz = 0;
        for (int j = 0; j < 50; ++j) nz += r.density[i * 50 + j] > 0.0;
        CHECK(nz == 1);
    }
    std::ostringstream os;
    write_angle_grid_csv(os, r, "abc");
    CHECK(os.str().find("manifest=abc") != std::string::npos);
    CHECK_THROWS_AS(angle_density_grid(ctx, -2.0, 2.0, 10, -1e-6, 1e-6, 10), ValidationError);
}

TEST_CASE("transverse wave numbers from detector angles") {
    const double E = 3.75, k = E / kHbarC;
    auto [kx0, ky0] = transverse_k_from_angles(0.0, 0.0, E);
    CHECK(kx0 == 0.0);
    CHECK(ky0 == 0.0);
    auto [kx, ky] = transverse_k_from_angles(0.3, 0.0, E);
    CHECK(kx == doctest::Approx(k * std::sin(0.3)).epsilon(1e-14));
    CHECK(ky == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double px = 1.5 * U(rng), py = 1.5 * U(rng);
        auto [a, b] = transverse_k_from_angles(px, py, E);
        CHECK(a * a + b * b <= k * k * (1 + 1e-12));
        if (std::abs(px) < 1.0 && std::abs(py) < 1.0) {
            auto [qx, qy] = angles_from_transverse_k(a, b, E);
            CHECK(std::abs(qx - px) < 1e-10);
            CHECK(std::abs(qy - py) < 1e-10);
            // Independent numerical inversion: Newton on the forward map.
            double x = 0.0, y = 0.0;
            for (int it = 0; it < 50; ++it) {
                auto [fx, fy] = transverse_k_from_angles(x, y, E);
                const double e = 1e-7;
                auto [ax, ay] = transverse_k_from_angles(x + e, y, E);
                auto [bx, by] = transverse_k_from_angles(x, y + e, E);
                const double j11 = (ax - fx) / e, j21 = (ay - fy) / e, j12 = (bx - fx) / e, j22 = (by - fy) / e;
                const double det = j11 * j22 - j12 * j21;
                const double rx = fx - a, ry = fy - b;
                x -= (j22 * rx - j12 * ry) / det;
                y -= (-j21 * rx + j11 * ry) / det;
            }
            CHECK(std::abs(x - qx) < 1e-8);
            CHECK(std::abs(y - qy) < 1e-8);
        }
    }
    CHECK_THROWS_AS(angles_from_transverse_k(k, 0.1, E), ValidationError);
}
