#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "epr/constants.hpp"

namespace epr {

struct QuadratureGrid {
    int n_kx = 101;  // kernel axis nodes on [0, k_x_max] (odd)
    int n_ky = 201;  // inner Simpson nodes along k_y (odd)
    int n_kz = 201;  // inner Simpson nodes along k'_z (odd)
    int n_x = 1601;  // position cells across [-x_max, x_max]
};

// All physical and numerical parameters of one Cherenkov configuration.
struct PhysicalScenario {
    double L_z = 0.2;       // μm
    double n_refr = 1.6;
    double E_kin = 200e3;   // eV
    // When set, used instead of the β derived from E_kin.
    std::optional<double> beta_override;
    double dp_rel = 1e-6;   // Δp_z / p̄_z
    double E_min = 3.5;     // eV
    double E_max = 4.0;     // eV
    double k_x_max = 0.0;   // rad/μm; 0 selects ω_max/c
    double k_y_min = 0.0;   // rad/μm
    double k_y_max = 0.0;   // rad/μm; 0 selects ω_max/c
    double x_max = 60.0;    // μm
    QuadratureGrid grid;

    double beta() const;
    double gamma() const;
    double total_energy() const;     // E_i = E_kin + m_e c², eV
    double mean_momentum() const;    // p̄_z in rad/μm
    double momentum_spread() const;  // Δp_z in rad/μm
    double k_vac_min() const { return E_min / kHbarC; } // ω_min/c
    double k_vac_max() const { return E_max / kHbarC; } // ω_max/c
    double kx_cutoff() const;
    double ky_cap() const;
};

// Reference configuration: 200 nm slab, ñ = 1.6,
// β = 0.7, photon energies 3.5–4.0 eV, Δp_z/p̄_z = 1e-6.
PhysicalScenario reference_scenario();

// Throws ValidationError when an invariant is violated.
void validate(const PhysicalScenario& s);

// Canonical text form (17 significant digits) and its FNV-1a hash.
std::string canonical_string(const PhysicalScenario& s);
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

} // namespace epr
