#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "epr/scenario.hpp"

namespace epr {

struct KinematicContext {
    double E_i = 0.0;    // total incident electron energy, eV
    double beta = 0.0;
    double E_min = 0.0;  // photon energy window [E_min, E_min + dE], eV
    double dE = 0.0;

    static KinematicContext from_scenario(const PhysicalScenario& s);
    void validate() const;
};

// Electron deflection angle for a photon emitted at φ_γ with energy E_γ.
double electron_angle_from_photon(double phi_gamma, double E_gamma, const KinematicContext& ctx);

// Photon energy consistent with an angle pair, or NaN if tanφ_e·tanφ_γ ≥ 0.
double consistent_photon_energy(double phi_e, double phi_gamma, const KinematicContext& ctx);

// Windowed density of φ_e given φ_γ (uniform E_γ over the window). Zero outside
// the support; requires dE > 0.
double joint_angle_density(double phi_e, double phi_gamma, const KinematicContext& ctx);

// ∫ joint_angle_density dφ_e and ∫ φ_e · density dφ_e over the support for fixed φ_γ.
double conditional_norm(double phi_gamma, const KinematicContext& ctx, int n = 2001);
double conditional_mean(double phi_gamma, const KinematicContext& ctx, int n = 2001);

struct AngleGrid {
    std::vector<double> phi_gamma, phi_e;  // cell centres, rad
    std::vector<double> density;           // row = φ_γ index, normalised to unit integral
};

// Cell-averaged density on a uniform (φ_γ, φ_e) grid. With dE = 0 the ridge of
// the monochromatic case is deposited into the cell containing φ_e(φ_γ).
AngleGrid angle_density_grid(const KinematicContext& ctx, double phig_lo, double phig_hi, int n_g,
                             double phie_lo, double phie_hi, int n_e);
void write_angle_grid_csv(std::ostream& os, const AngleGrid& g, const std::string& manifest_hash);

// (k_x, k_y) in rad/μm of a photon of energy E_γ travelling at detector angles (φ_x, φ_y).
std::pair<double, double> transverse_k_from_angles(double phi_x, double phi_y, double E_gamma);
std::pair<double, double> angles_from_transverse_k(double k_x, double k_y, double E_gamma);

} // namespace epr
