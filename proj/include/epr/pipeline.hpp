#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epr/criteria.hpp"
#include "epr/measurement.hpp"
#include "epr/optimizer.hpp"
#include "epr/scenario.hpp"

namespace epr {

inline constexpr int kReportSchemaVersion = 1;

struct RunManifest {
    PhysicalScenario scenario = reference_scenario();
    ResolutionProfile resolution{};
    // Binning: explicit periods, or an optimizer directive.
    double T_x = 10.0;
    double x_center = 0.0;
    std::optional<double> p_center;  // default −T_p/4 (element 0 centred on p = 0)
    bool optimize = false;
    OptimizerOptions optimizer{};
    DensityOptions density{};
    // "physics" runs the full model; "counts" ingests coincidence tables only.
    std::string mode = "physics";
    std::string counts_xx, counts_pp, counts_xp, counts_px;
    // Artifacts.
    std::string output_dir = ".";
    std::string kernel_cache;
    bool write_densities = false;
    bool write_kernel = false;
    std::uint64_t seed = 1;

    // Sets one field from its config-file key; throws ValidationError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();
    // Canonical form of every result-affecting field, and its FNV-1a hash.
    std::string canonical() const;
    std::string hash() const;
    void validate() const;
};

// key = value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config(std::istream& is);
RunManifest load_manifest(const std::string& path);

struct CertifyResult {
    CertificationReport report;
    std::optional<OptimizationResult> optimization;
    std::optional<KernelBuildReport> kernel_build;
    std::optional<MomentumKernel> kernel;
    double T_x = 0.0, T_p = 0.0, x_center = 0.0, p_center = 0.0;
    std::vector<std::string> stages;  // stage log, in execution order
    // Densities entering the tables (physics mode only), electron-basis first.
    std::vector<JointDensity> densities;
};

// Loads the kernel from manifest.kernel_cache when its scenario hash matches, else builds it.
MomentumKernel obtain_kernel(const RunManifest& m, std::vector<std::string>& stages,
                             std::optional<KernelBuildReport>& build);

CertifyResult run_certify(const RunManifest& m);
// Certification using a kernel that is already at hand (skips the kernel stage).
CertifyResult run_certify(const RunManifest& m, const MomentumKernel& K);

std::string report_json(const RunManifest& m, const CertifyResult& r);
// Writes report.json, tables.csv and the optional artifacts into m.output_dir.
void write_artifacts(const RunManifest& m, const CertifyResult& r);
void write_density_csv(std::ostream& os, const JointDensity& d, const std::string& manifest_hash);

struct SweepRow {
    std::string value;
    double witness_sum, fidelity, ef, corr_xx, corr_pp, mixed_max_deviation;
};
std::vector<SweepRow> run_sweep(const RunManifest& m, const std::string& axis,
                                const std::vector<std::string>& values);
void write_sweep_csv(std::ostream& os, const std::string& axis, const std::vector<SweepRow>& rows,
                     const std::string& manifest_hash);

// Max over T_x of the robustness measure on a (Σ_x, Σ_p) grid, with the feasible interval.
struct RobustnessRow {
    double sigma_x, sigma_p, best_Tx, best_measure;
    std::optional<std::pair<double, double>> interval;
};
RobustnessRow robustness_point(double sigma_x, double sigma_p);

} // namespace epr
