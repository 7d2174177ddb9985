#pragma once

#include <cstdint>
#include <vector>

#include "epr/measurement.hpp"

namespace epr {

struct OptimizerOptions {
    double Tx_lo = 2.0, Tx_hi = 20.0;  // μm search bracket
    double log_tol = 1e-3;             // golden-section stop width in ln T_x
    int n_starts = 3;
    bool optimize_centers = true;
    int n_phase = 16;                  // coarse center scan points per period
    BinningOptions binning{};
};

struct TraceRow {
    double T_x, T_p, objective;
};

struct OptimizationResult {
    double best_Tx = 0.0, best_Tp = 0.0;
    double x_center = 0.0, p_center = 0.0;
    double objective = 0.0;  // witness sum at the optimum
    bool certification_possible = false;
    std::vector<TraceRow> trace;
};

// Correlated-basis densities entering the witness objective (already blurred).
struct WitnessDensities {
    JointDensity pp, xx;
};

WitnessDensities witness_densities(const MomentumKernel& K, const ResolutionProfile& r, double x_max,
                                   const DensityOptions& opt = {});

// Witness sum for one basis choice; centers are taken as given.
double witness_objective(const WitnessDensities& w, double T_x, double x_center, double p_center,
                         const BinningOptions& opt = {});

OptimizationResult optimize_periods(const WitnessDensities& w, const OptimizerOptions& opt = {});

struct ProbeSpec {
    int n_probes = 5;
    double width_fraction = 0.1;  // probe σ as a fraction of the bin width
    std::uint64_t seed = 1;
    // Sequential-projection entropy test.
    double entropy_sigma = 0.1;   // μm
    double entropy_Tx = 10.0;     // μm
    double perturbation = 0.2;    // relative error applied to T_p
    double domain = 2000.0;       // μm, periodic FFT box (multiple of T_x)
    double dx = 0.02;             // μm
};

struct UnbiasednessReport {
    double max_deviation = 0.0;       // periodic MUB pair, both orders and both phases
    double slit_deviation = 0.0;      // single-window position projector contrast
    double entropy_exact = 0.0;       // nats, T_p matched
    double entropy_perturbed = 0.0;   // nats, T_p mismatched
    double entropy_reduction = 0.0;   // 1 − H/ln d for the perturbed case
};

// Outcome probabilities of a Gaussian N(mu, sigma²) under a periodic binning.
std::vector<double> gaussian_outcomes(double mu, double sigma, const PeriodicBinning& b);

// Relative entropy drop after position → momentum → position projections.
double projection_entropy(double T_x, double perturbation, const ProbeSpec& spec);

UnbiasednessReport verify_unbiasedness(const MubPair& pair, const ProbeSpec& spec = {});

} // namespace epr
