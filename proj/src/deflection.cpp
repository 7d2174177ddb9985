#include "epr/deflection.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <ostream>
#include <string>

#include "epr/constants.hpp"
#include "epr/quadrature.hpp"

namespace epr {

KinematicContext KinematicContext::from_scenario(const PhysicalScenario& s) {
    return {s.total_energy(), s.beta(), s.E_min, s.E_max - s.E_min};
}

void KinematicContext::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("kinematics: beta must lie in (0, 1)");
    if (!(E_i > 0.0)) throw ValidationError("kinematics: E_i must be > 0");
    if (!(dE >= 0.0) || !(E_min > 0.0)) throw ValidationError("kinematics: invalid photon energy window");
}

double electron_angle_from_photon(double phi_gamma, double E_gamma, const KinematicContext& ctx) {
    if (!(std::abs(phi_gamma) < 0.5 * kPi)) throw ValidationError("deflection: |phi_gamma| must be < pi/2");
    const double B = ctx.beta * ctx.beta * ctx.E_i;
    if (B == E_gamma) throw ValidationError("deflection: beta^2 E_i equals E_gamma");
    return -std::atan(E_gamma * std::tan(phi_gamma) / (B - E_gamma));
}

double consistent_photon_energy(double phi_e, double phi_gamma, const KinematicContext& ctx) {
    const double te = std::tan(phi_e), tg = std::tan(phi_gamma);
    if (!(te * tg < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return ctx.beta * ctx.beta * ctx.E_i * te / (te - tg);
}

double joint_angle_density(double phi_e, double phi_gamma, const KinematicContext& ctx) {
    if (!(ctx.dE > 0.0)) throw ValidationError("joint_angle_density: windowed form needs dE > 0");
    const double E = consistent_photon_energy(phi_e, phi_gamma, ctx);
    if (std::isnan(E) || E < ctx.E_min || E > ctx.E_min + ctx.dE) return 0.0;
    const double B = ctx.beta * ctx.beta * ctx.E_i;
    const double tg = std::tan(phi_gamma);
    const double sec2 = 1.0 + tg * tg;
    return std::abs((B * B - 2.0 * B * E + sec2 * E * E) / (tg * B * ctx.dE));
}

namespace {

template <class F>
double support_integral(double phi_gamma, const KinematicContext& ctx, int n, F weight) {
    if (phi_gamma == 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (n % 2 == 0) ++n;
    const double a = electron_angle_from_photon(phi_gamma, ctx.E_min, ctx);
    const double b = electron_angle_from_photon(phi_gamma, ctx.E_min + ctx.dE, ctx);
    const double lo = std::min(a, b), hi = std::max(a, b);
    // Open the interval by a hair so the endpoint evaluations stay on the support.
    const double eps = 1e-12 * (hi - lo);
    const auto w = simpson_weights(n, hi - lo - 2.0 * eps);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double pe = lo + eps + (hi - lo - 2.0 * eps) * i / (n - 1);
        acc += w[i] * weight(pe) * joint_angle_density(pe, phi_gamma, ctx);
    }
    return acc;
}

} // namespace

double conditional_norm(double phi_gamma, const KinematicContext& ctx, int n) {
    return support_integral(phi_gamma, ctx, n, [](double) { return 1.0; });
}

double conditional_mean(double phi_gamma, const KinematicContext& ctx, int n) {
    return support_integral(phi_gamma, ctx, n, [](double pe) { return pe; }) / conditional_norm(phi_gamma, ctx, n);
}

AngleGrid angle_density_grid(const KinematicContext& ctx, double phig_lo, double phig_hi, int n_g,
                             double phie_lo, double phie_hi, int n_e) {
    ctx.validate();
    if (n_g < 1 || n_e < 1 || !(phig_hi > phig_lo) || !(phie_hi > phie_lo))
        throw ValidationError("angle_density_grid: bad grid");
    if (!(phig_lo > -0.5 * kPi && phig_hi < 0.5 * kPi))
        throw ValidationError("angle_density_grid: photon angles must stay within (-pi/2, pi/2)");
    AngleGrid g;
    const double hg = (phig_hi - phig_lo) / n_g, he = (phie_hi - phie_lo) / n_e;
    for (int i = 0; i < n_g; ++i) g.phi_gamma.push_back(phig_lo + (i + 0.5) * hg);
    for (int j = 0; j < n_e; ++j) g.phi_e.push_back(phie_lo + (j + 0.5) * he);
    g.density.assign(static_cast<std::size_t>(n_g) * n_e, 0.0);
    for (int i = 0; i < n_g; ++i) {
        const double pg = g.phi_gamma[i];
        double* row = &g.density[static_cast<std::size_t>(i) * n_e];
        if (ctx.dE == 0.0 || pg == 0.0) {
            const double pe = electron_angle_from_photon(pg, ctx.E_min + 0.5 * ctx.dE, ctx);
            const int j = static_cast<int>(std::floor((pe - phie_lo) / he));
            if (j >= 0 && j < n_e) row[j] = 1.0 / he;
            continue;
        }
        // Cell average = (mass of E_γ mapping into the cell) / h_e; φ_e is monotone in E_γ.
        const double a = electron_angle_from_photon(pg, ctx.E_min, ctx);
        const double b = electron_angle_from_photon(pg, ctx.E_min + ctx.dE, ctx);
        const double lo = std::min(a, b), hi = std::max(a, b);
        for (int j = 0; j < n_e; ++j) {
            const double c0 = std::max(lo, phie_lo + j * he), c1 = std::min(hi, phie_lo + (j + 1) * he);
            if (c1 <= c0) continue;
            const double E0 = consistent_photon_energy(c0, pg, ctx), E1 = consistent_photon_energy(c1, pg, ctx);
            row[j] = std::abs(E1 - E0) / ctx.dE / he;
        }
    }
    double tot = 0.0;
    for (double v : g.density) tot += v;
    tot *= hg * he;
    if (tot > 0.0)
        for (double& v : g.density) v /= tot;
    return g;
}

void write_angle_grid_csv(std::ostream& os, const AngleGrid& g, const std::string& manifest_hash) {
    os << "# joint deflection-angle density; manifest=" << manifest_hash << "\n";
    os << "phi_gamma_rad,phi_e_rad,density_per_rad2\n";
    char buf[96];
    for (std::size_t i = 0; i < g.phi_gamma.size(); ++i)
        for (std::size_t j = 0; j < g.phi_e.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", g.phi_gamma[i], g.phi_e[j],
                          g.density[i * g.phi_e.size() + j]);
            os << buf;
        }
}

std::pair<double, double> transverse_k_from_angles(double phi_x, double phi_y, double E_gamma) {
    if (!(std::abs(phi_x) < 0.5 * kPi && std::abs(phi_y) < 0.5 * kPi))
        throw ValidationError("transverse_k_from_angles: angles must lie in (-pi/2, pi/2)");
    const double k = E_gamma / kHbarC;
    const double sx = std::sin(phi_x), sy = std::sin(phi_y);
    const double cx = std::cos(phi_x), cy = std::cos(phi_y);
    const double den = std::sqrt(1.0 - sx * sx * sy * sy);
    return {k * sx * cy / den, k * sy * cx / den};
}

std::pair<double, double> angles_from_transverse_k(double k_x, double k_y, double E_gamma) {
    const double k = E_gamma / kHbarC;
    const double kz2 = k * k - k_x * k_x - k_y * k_y;
    if (!(kz2 > 0.0)) throw ValidationError("angles_from_transverse_k: |k_perp| must be below E/(hbar c)");
    const double kz = std::sqrt(kz2);
    return {std::atan2(k_x, kz), std::atan2(k_y, kz)};
}

} // namespace epr
