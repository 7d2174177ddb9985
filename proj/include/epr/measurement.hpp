#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epr/cherenkov_kernel.hpp"

namespace epr {

enum class Basis { Position, Momentum };
const char* basis_name(Basis b);

// Periodic coarse-graining into d interleaved outcome classes.
struct PeriodicBinning {
    double T = 1.0;       // period (μm or ħ/μm)
    int d = 2;            // number of outcomes
    double center = 0.0;  // pattern origin, same unit as T

    PeriodicBinning() = default;
    PeriodicBinning(double period, int outcomes, double origin);

    double width() const { return T / d; }
    int outcome(double v) const;
    // Length of {x ∈ [a, b] : outcome(x) == n}.
    double overlap(double a, double b, int n) const;
};

// Detector-plane pre-transforms.
// Imaging plane: x = x' / A.
double position_from_detector(double x_det, double magnification);
// Fourier plane: p = |p| (x'/A) / sqrt((x'/A)² + (y'/A)² + 1).
double momentum_from_detector(double x_det, double y_det, double magnification, double p_abs);

int bin_outcome(double value, const PeriodicBinning& b);

// Conjugate pair of periodic binnings with T_x · T_p = 2π d / u.
struct MubPair {
    PeriodicBinning pos;
    PeriodicBinning mom;
    int u = 1;

    static MubPair from_position_period(double T_x, int d = 2, int u = 1, double x_cen = 0.0,
                                        double p_cen = 0.0);
    // Throws ValidationError if the period product or coprimality fails.
    void check() const;
};

struct Axis {
    Basis basis = Basis::Position;
    std::string label;  // e.g. "x_e", "p_e", "x_gamma", "k_gamma"
    std::string unit;   // "um" or "hbar/um"
    double lo = 0.0, hi = 0.0;
    int n = 0;          // number of cells
    double h() const { return (hi - lo) / n; }
    double center(int i) const { return lo + (i + 0.5) * h(); }
};

// Exact carrier for the unblurred momentum–momentum density: all mass sits on
// p_e = −ħk_γ, with weight f̃(k, k) interpolated linearly between kernel nodes.
struct Ridge {
    std::vector<double> k_nodes;   // |k| nodes, uniform from 0
    std::vector<double> weight;    // f̃(k, k) at nodes, rescaled to unit total
    double value(double k) const;  // weight at signed k
    double integral(double a, double b) const;  // exact for the interpolant
};

// Labelled joint probability over (κ_e, κ'_γ). `mass` holds per-cell
// probabilities (row index = electron cell); density = mass / (h_e h_γ).
struct JointDensity {
    Axis e, g;
    std::vector<double> mass;
    std::optional<Ridge> ridge;  // set for the unblurred p–p case (mass empty)
    // Relative-coordinate profile for the x–x case: Π(s), s = x_e − x_γ ≥ 0,
    // normalised so that ∫_{-∞}^{∞} Π(s) ds = 1. apply_psf blurs it alongside the grid.
    std::vector<double> profile_s, profile;
    double margin_e = 0.0, margin_g = 0.0;  // edge widths distorted by PSF truncation

    bool is_grid() const { return !mass.empty(); }
    double at(int i, int j) const { return mass[static_cast<std::size_t>(i) * g.n + j]; }
    double total() const;
};

struct DensityOptions {
    int n_x = 1601;  // position cells across [-x_max, x_max]
    int n_p = 2001;  // momentum cells across [-k_x_max, k_x_max]
    int profile_oversample = 8;  // profile samples per position cell
    // density_xx throws ConvergenceError if the profile moves > 1% when x_max grows by 50%.
    bool check_window = true;
};

JointDensity density_pp(const MomentumKernel& K);
enum class MixedKind { XePg, PeXg };
JointDensity density_mixed(const MomentumKernel& K, MixedKind which, double x_max,
                           const DensityOptions& opt = {});
// Π(s) ∝ ∬ f̃(k1, k2) e^{i(k1−k2)s} over the mirrored domain, evaluated exactly
// for the bilinear interpolant of the kernel.
double xx_profile_unnormalised(const MomentumKernel& K, double s);
JointDensity density_xx(const MomentumKernel& K, double x_max, const DensityOptions& opt = {});
// Relative change of the normalised profile at s = 0 when x_max grows by 50%.
double xx_window_sensitivity(const MomentumKernel& K, double x_max);

// Materialise a ridge density on an explicit momentum grid.
JointDensity ridge_to_grid(const JointDensity& d, int n_p);

struct ResolutionProfile {
    double fwhm_x_e = 0.0, fwhm_p_e = 0.0, fwhm_x_g = 0.0, fwhm_p_g = 0.0;
    static ResolutionProfile ideal() { return {}; }
    static ResolutionProfile experimental() { return {0.1, 0.2, 1.2, 0.2}; }
};

// Cell-to-cell transfer weights of a Gaussian PSF of width σ on cells of width h,
// truncated at 6σ and normalised. Index m ↔ offset m − (size−1)/2.
std::vector<double> gaussian_cell_weights(double sigma, double h);

JointDensity apply_psf(const JointDensity& d, const ResolutionProfile& r, int n_p_for_ridge = 2001);

struct JointProbTable {
    Basis basis_e = Basis::Position, basis_g = Basis::Position;
    int d = 2;
    std::vector<double> p;       // d×d, row = electron outcome
    std::vector<double> stderr_; // optional multinomial standard errors
    std::vector<std::string> warnings;

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * d + j]; }
    double sum() const;
};

struct BinningOptions {
    // Restrict position axes to a centred whole number of periods that avoids
    // PSF-distorted margins (removes finite-window bias).
    bool whole_periods = true;
    // Position–position densities that carry a relative-coordinate profile are
    // binned in the infinite-window limit (exactly independent of a common
    // pattern shift); false forces the finite-grid evaluation.
    bool use_profile = true;
};

JointProbTable joint_probabilities(const JointDensity& dens, const PeriodicBinning& bin_e,
                                   const PeriodicBinning& bin_g, const BinningOptions& opt = {});

JointProbTable counts_to_probabilities(const std::vector<std::int64_t>& counts, int d);
// CSV rows "n_e,n_gamma,count"; an optional header row is skipped.
std::vector<std::int64_t> read_counts_csv(std::istream& is, int& d_out);

} // namespace epr
