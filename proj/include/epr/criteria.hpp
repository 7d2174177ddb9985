#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "epr/cherenkov_kernel.hpp"
#include "epr/measurement.hpp"

namespace epr {

// Photon-outcome permutation σ maximising Σ_n P(n, σ(n)); identity wins ties.
std::vector<int> best_relabeling(const JointProbTable& t);
double correlated_sum(const JointProbTable& t, const std::vector<int>& sigma);

struct WitnessResult {
    double sum = 0.0;
    double threshold = 0.0;  // 1 + (M − 1)/d
    bool entangled = false;
    std::vector<std::vector<int>> labelings;
};

// MUB separability witness over M correlated-basis tables (e.g. {x–x, p–p}).
WitnessResult mub_witness(const std::vector<JointProbTable>& tables);

// d = 2 fidelity bound from a position and a momentum table (after relabelling).
double fidelity_lower_bound(const JointProbTable& pos, const JointProbTable& mom);

struct FormationBound {
    double I = 0.0;
    double ef = 0.0;       // −ln(1 − I²)
    double ef_log2 = 0.0;  // −log₂(1 − I²)
};
FormationBound ef_lower_bound(double fidelity, const JointProbTable& pos);

// ∬_{k1<k2} |f̃| divided by ∫ f̃(k, k), trapezoid weights on the grid nodes.
// The kernel form expands the quadrant to the full mirrored axis first.
double ppt_negativity(const std::vector<double>& axis, const std::vector<double>& f_full);
double ppt_negativity(const MomentumKernel& K);

// Correlation measure for Gaussian-ridge states of widths Σ_x, Σ_p with T_p = 4π/T_x.
inline constexpr double kRobustnessA = 1.235;
double robustness_measure(double sigma_x, double sigma_p, double T_x);
// [T_x⁻, T_x⁺] where the measure stays ≥ 1.5; empty when Σ_xΣ_p > a.
std::optional<std::pair<double, double>> feasible_period_interval(double sigma_x, double sigma_p);

struct CertificationReport {
    JointProbTable pp, xx, xp, px;  // electron basis first
    WitnessResult witness;
    double fidelity = 0.0;
    FormationBound formation;
    std::optional<double> negativity;
    double mixed_max_deviation = 0.0;  // max |P − 1/d| over both mixed tables
    bool entangled_witness = false, entangled_fidelity = false, entangled_negativity = false;
};

CertificationReport certify(const JointProbTable& pp, const JointProbTable& xx, const JointProbTable& xp,
                            const JointProbTable& px, std::optional<double> negativity = std::nullopt);

} // namespace epr
