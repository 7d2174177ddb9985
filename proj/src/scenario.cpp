#include "epr/scenario.hpp"

#include <cmath>
#include <cstdio>

#include "epr/constants.hpp"

namespace epr {

double PhysicalScenario::beta() const {
    if (beta_override) return *beta_override;
    const double r = kElectronRestEnergy / (kElectronRestEnergy + E_kin);
    return std::sqrt(1.0 - r * r);
}

double PhysicalScenario::gamma() const {
    const double b = beta();
    return 1.0 / std::sqrt(1.0 - b * b);
}

double PhysicalScenario::total_energy() const { return E_kin + kElectronRestEnergy; }

double PhysicalScenario::mean_momentum() const {
    return beta() * gamma() * kElectronRestEnergy / kHbarC;
}

double PhysicalScenario::momentum_spread() const { return dp_rel * mean_momentum(); }

double PhysicalScenario::kx_cutoff() const { return k_x_max > 0.0 ? k_x_max : k_vac_max(); }

double PhysicalScenario::ky_cap() const { return k_y_max > 0.0 ? k_y_max : k_vac_max(); }

PhysicalScenario reference_scenario() {
    PhysicalScenario s;
    s.beta_override = 0.7;
    return s;
}

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("scenario: ") + what);
}
bool odd_at_least(int n, int lo) { return n >= lo && (n % 2) == 1; }
} // namespace

void validate(const PhysicalScenario& s) {
    require(std::isfinite(s.L_z) && s.L_z > 0.0, "L_z must be > 0");
    require(std::isfinite(s.n_refr) && s.n_refr > 1.0, "n_refr must be > 1");
    require(s.E_kin > 0.0 || s.beta_override.has_value(), "E_kin must be > 0");
    const double b = s.beta();
    require(std::isfinite(b) && b > 0.0 && b < 1.0, "beta must lie in (0, 1)");
    require(b * s.n_refr > 1.0, "Cherenkov condition beta * n_refr > 1 violated");
    require(s.dp_rel > 0.0, "dp_rel must be > 0");
    require(s.E_min > 0.0 && s.E_min < s.E_max, "photon window needs 0 < E_min < E_max");
    require(s.k_x_max >= 0.0, "k_x_max must be >= 0 (0 = automatic)");
    require(s.k_y_min >= 0.0, "k_y_min must be >= 0");
    require(s.k_y_max >= 0.0, "k_y_max must be >= 0 (0 = automatic)");
    require(s.ky_cap() > s.k_y_min, "k_y_max must exceed k_y_min");
    require(s.x_max > 0.0, "x_max must be > 0");
    require(odd_at_least(s.grid.n_kx, 5), "grid.n_kx must be odd and >= 5");
    require(odd_at_least(s.grid.n_ky, 5), "grid.n_ky must be odd and >= 5");
    require(odd_at_least(s.grid.n_kz, 5), "grid.n_kz must be odd and >= 5");
    require(s.grid.n_x >= 16, "grid.n_x must be >= 16");
}

std::string canonical_string(const PhysicalScenario& s) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "L_z=%.17g;n_refr=%.17g;E_kin=%.17g;beta=%.17g;dp_rel=%.17g;E_min=%.17g;"
                  "E_max=%.17g;k_x_max=%.17g;k_y_min=%.17g;k_y_max=%.17g;x_max=%.17g;"
                  "n_kx=%d;n_ky=%d;n_kz=%d;n_x=%d",
                  s.L_z, s.n_refr, s.E_kin, s.beta(), s.dp_rel, s.E_min, s.E_max, s.kx_cutoff(),
                  s.k_y_min, s.ky_cap(), s.x_max, s.grid.n_kx, s.grid.n_ky, s.grid.n_kz, s.grid.n_x);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace epr
