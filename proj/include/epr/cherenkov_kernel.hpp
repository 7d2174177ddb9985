#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epr/scenario.hpp"

namespace epr {

struct CharacteristicAngles {
    double theta_cr;    // arccos(1/(βñ)), rad
    double theta_crit;  // arcsin(1/ñ), rad
};

CharacteristicAngles characteristic_angles(double beta, double n_refr);
CharacteristicAngles characteristic_angles(const PhysicalScenario& s);

struct Vec3 {
    double x, y, z;
};

// Low-energy Cherenkov amplitude 𝒜(k) for an in-medium wave vector k.
double cherenkov_amplitude(const Vec3& k, double n_refr, double beta, double L_z);
double cherenkov_amplitude(const Vec3& k, const PhysicalScenario& s);

// Parallel-polarisation Fresnel amplitude τ∥ for an internal angle θ;
// zero beyond the critical angle.
double fresnel_tau_parallel(double theta, double n_refr);
// Power transmission 𝒯∥ = 4ñ cosθ cosθ_t / (cosθ + ñ cosθ_t)².
double fresnel_power_transmission(double theta, double n_refr);

// Integration domain in (k_y, k'_z) for a fixed pair (k1x, k2x).
struct IntegrationRegion {
    bool empty = true;
    double ky_lo = 0.0, ky_hi = 0.0;
    double kx_small = 0.0, kx_large = 0.0;  // min / max of |k1x|, |k2x|
    double kv_min2 = 0.0, kv_max2 = 0.0;    // (ω_min/c)², (ω_max/c)²

    double kz_lo(double ky) const;
    double kz_hi(double ky) const;
};

IntegrationRegion integration_region(double k1x, double k2x, const PhysicalScenario& s);

// Integrand of the kernel element at one (k_y, k'_z) node.
class KernelIntegrand {
public:
    explicit KernelIntegrand(const PhysicalScenario& s);
    double operator()(double k1x, double k2x, double ky, double kzp) const;

private:
    double n_, beta_, Lz_, amp_pref_, gauss_inv_, kv_min2_, kv_max2_;
    double amp_factor(double kx2, double ky, double kzp, double& kz_med, double& k_med) const;
};

struct ElementResult {
    double value = 0.0;
    bool converged = true;
    int n_ky = 0, n_kz = 0;
    double rel_change = 0.0;  // last successive-halving disagreement
};

struct ElementOptions {
    double rel_tol = 5e-3;
    double abs_tol = 0.0;
    int max_nodes = 801;
};

// Unnormalised f(k1x, k2x) by nested composite Simpson with successive halving.
ElementResult kernel_element(double k1x, double k2x, const PhysicalScenario& s,
                             const ElementOptions& opt = {});
// Same integral on an explicit fixed (n_ky × n_kz) grid; no adaptivity.
double kernel_element_fixed(double k1x, double k2x, const PhysicalScenario& s, int n_ky, int n_kz);

// Normalised reduced kernel on the [0, k_x_max]² quadrant.
struct MomentumKernel {
    std::vector<double> k_axis;
    std::vector<double> f;  // row-major, size n²
    double norm = 0.0;      // Ñ
    std::string scenario_hash;

    int size() const { return static_cast<int>(k_axis.size()); }
    double dk() const { return k_axis.size() > 1 ? k_axis[1] - k_axis[0] : 0.0; }
    double kmax() const { return k_axis.empty() ? 0.0 : k_axis.back(); }
    double at(int i, int j) const { return f[static_cast<std::size_t>(i) * k_axis.size() + j]; }
    double& at(int i, int j) { return f[static_cast<std::size_t>(i) * k_axis.size() + j]; }
    // f̃ on the full mirrored domain, bilinear in |k1|, |k2|; 0 outside.
    double mirrored(double k1, double k2) const;
    // f̃(k, k) on the full axis (interpolated in |k|).
    double diagonal(double k) const;
    // ∫_{-kmax}^{kmax} f̃(k, k) dk.
    double trace() const;
};

struct KernelBuildReport {
    int elements = 0;
    int not_converged = 0;
    double max_rel_change = 0.0;
};

// Evaluates the quadrant, normalises by Ñ = ∫ f(k,k) dk over [-k_x_max, k_x_max].
MomentumKernel build_kernel(const PhysicalScenario& s, KernelBuildReport* report = nullptr,
                            const ElementOptions& opt = {});

// Share of the quadrant's ℓ₁ mass with |k1x − k2x| ≤ band.
double band_mass_fraction(const MomentumKernel& K, double band);

void write_kernel_csv(std::ostream& os, const MomentumKernel& K);
MomentumKernel read_kernel_csv(std::istream& is);

// ---- emission-angle profile ----

struct ProfileOptions {
    // Explicit k_min·L_z and k_max·L_z; by default ñ·E/(ħc)·L_z.
    std::optional<double> kl_min, kl_max;
    // true: integrate over the full solid angle (2π sinθ dθ);
    // false: per unit azimuth (sinθ dθ).
    bool full_azimuth = true;
    int n_theta = 4001;
};

struct AngularProfile {
    std::vector<double> theta_axis;  // rad on [0, π/2]
    std::vector<double> inside;      // dP/dΩ
    std::vector<double> outside;     // dP/dΩ · 𝒯∥, zero beyond θ_crit
    double p_out_total = 0.0;
    double p_in_total = 0.0;
    double kl_min = 0.0, kl_max = 0.0;
};

// log(b/a) − Ci(b·u) + Ci(a·u), divided by u²; finite as u → 0.
double ci_bracket_over_u2(double a, double b, double u);
// dP/dΩ inside the dielectric at internal angle θ.
double emission_density(double theta, double beta, double n_refr, double kl_min, double kl_max);

AngularProfile emission_profile(const PhysicalScenario& s, const ProfileOptions& opt = {});

} // namespace epr
