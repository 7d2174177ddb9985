// Command-line front end: certify, optimize, sweep, profile, deflect, robustness.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "epr/cherenkov_kernel.hpp"
#include "epr/constants.hpp"
#include "epr/criteria.hpp"
#include "epr/deflection.hpp"
#include "epr/pipeline.hpp"

using namespace epr;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string output_dir;
    std::string kernel_cache;
    std::string resolution;
    double T_x = 0.0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "key = value configuration file");
    app->add_option("-s,--set", c.sets, "override a config key (key=value), repeatable");
    app->add_option("-o,--output-dir", c.output_dir, "directory for reports and CSV files");
    app->add_option("--kernel-cache", c.kernel_cache, "kernel CSV reused when its scenario hash matches");
    app->add_option("--resolution", c.resolution, "detector preset: ideal | experimental");
    app->add_option("--T-x", c.T_x, "position period in um (momentum period follows as 4 pi / T_x)");
}

// Config file first, then flags (flags win).
RunManifest manifest_from(const Common& c) {
    RunManifest m = c.config.empty() ? RunManifest{} : load_manifest(c.config);
    if (!c.resolution.empty()) m.set("resolution", c.resolution);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
        m.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!c.output_dir.empty()) m.output_dir = c.output_dir;
    if (!c.kernel_cache.empty()) m.kernel_cache = c.kernel_cache;
    if (c.T_x > 0.0) m.T_x = c.T_x;
    return m;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write '" + path.string() + "'");
    return os;
}

void print_summary(const CertifyResult& r) {
    const auto& c = r.report;
    auto tab = [](const char* name, const JointProbTable& t) {
        std::printf("  %-4s [%.4f %.4f; %.4f %.4f]\n", name, t.at(0, 0), t.at(0, 1), t.at(1, 0), t.at(1, 1));
    };
    std::printf("T_x = %.4f um, T_p = %.4f hbar/um\n", r.T_x, r.T_p);
    tab("x-x", c.xx);
    tab("p-p", c.pp);
    tab("x-p", c.xp);
    tab("p-x", c.px);
    std::printf("witness sum %.4f (threshold %.2f): %s\n", c.witness.sum, c.witness.threshold,
                c.entangled_witness ? "entangled" : "not detected");
    std::printf("fidelity bound %.4f: %s\n", c.fidelity, c.entangled_fidelity ? "entangled" : "not detected");
    std::printf("I = %.4f, E_F >= %.4f (nat), %.4f (bits)\n", c.formation.I, c.formation.ef, c.formation.ef_log2);
    if (c.negativity) std::printf("negativity indicator %.6g\n", *c.negativity);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electron-photon entanglement certification with periodic coarse-grained bases"};
    app.require_subcommand(1);

    Common cert_opts, opt_opts, sweep_opts, prof_opts, defl_opts;
    auto* certify_cmd = app.add_subcommand("certify", "run the full pipeline (or counts ingestion) and write a report");
    add_common(certify_cmd, cert_opts);

    auto* optimize_cmd = app.add_subcommand("optimize", "optimise the basis periods, then certify");
    add_common(optimize_cmd, opt_opts);

    auto* sweep_cmd = app.add_subcommand("sweep", "repeat certification over values of one config key");
    add_common(sweep_cmd, sweep_opts);
    std::string axis, values;
    sweep_cmd->add_option("--axis", axis, "config key to vary")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values (may be empty)");

    auto* profile_cmd = app.add_subcommand("profile", "emission-angle profile inside and outside the slab");
    add_common(profile_cmd, prof_opts);
    double kl_min = 0.0, kl_max = 0.0;
    bool per_azimuth = false;
    profile_cmd->add_option("--kl-min", kl_min, "override k_min * L_z");
    profile_cmd->add_option("--kl-max", kl_max, "override k_max * L_z");
    profile_cmd->add_flag("--per-azimuth", per_azimuth, "report probabilities per unit azimuth");

    auto* deflect_cmd = app.add_subcommand("deflect", "joint deflection-angle density on a grid");
    add_common(deflect_cmd, defl_opts);
    double phig_lo = -80.0, phig_hi = 80.0, phie_lo = -20.0, phie_hi = 20.0;
    int n_g = 161, n_e = 201;
    deflect_cmd->add_option("--phi-gamma-min", phig_lo, "deg");
    deflect_cmd->add_option("--phi-gamma-max", phig_hi, "deg");
    deflect_cmd->add_option("--phi-e-min", phie_lo, "urad");
    deflect_cmd->add_option("--phi-e-max", phie_hi, "urad");
    deflect_cmd->add_option("--n-gamma", n_g);
    deflect_cmd->add_option("--n-e", n_e);

    auto* robust_cmd = app.add_subcommand("robustness", "correlation measure over (Sigma_x, Sigma_p)");
    std::string sx_list = "0.1,0.2,0.5,1,2", sp_list = "0.1,0.2,0.5,1,2", rob_dir = ".";
    double rob_Tx = 0.0;
    robust_cmd->add_option("--sigma-x", sx_list, "comma-separated Sigma_x values, um");
    robust_cmd->add_option("--sigma-p", sp_list, "comma-separated Sigma_p values, hbar/um");
    robust_cmd->add_option("--T-x", rob_Tx, "fixed T_x; default maximises over T_x");
    robust_cmd->add_option("-o,--output-dir", rob_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*certify_cmd || *optimize_cmd) {
            RunManifest m = manifest_from(*certify_cmd ? cert_opts : opt_opts);
            if (*optimize_cmd) m.optimize = true;
            const CertifyResult r = run_certify(m);
            write_artifacts(m, r);
            print_summary(r);
            std::printf("report: %s\n", (std::filesystem::path(m.output_dir) / "report.json").string().c_str());
        } else if (*sweep_cmd) {
            const RunManifest m = manifest_from(sweep_opts);
            std::vector<std::string> vals;
            std::stringstream ss(values);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) vals.push_back(item);
            const auto rows = run_sweep(m, axis, vals);
            auto os = open_out(m.output_dir, "sweep_" + axis + ".csv");
            write_sweep_csv(os, axis, rows, m.hash());
            std::printf("%zu sweep rows written\n", rows.size());
        } else if (*profile_cmd) {
            const RunManifest m = manifest_from(prof_opts);
            validate(m.scenario);
            ProfileOptions po;
            if (kl_min > 0.0) po.kl_min = kl_min;
            if (kl_max > 0.0) po.kl_max = kl_max;
            po.full_azimuth = !per_azimuth;
            const auto P = emission_profile(m.scenario, po);
            const auto a = characteristic_angles(m.scenario);
            auto os = open_out(m.output_dir, "emission_profile.csv");
            os << "# emission angle profile; manifest=" << m.hash() << "\n";
            os << "theta_deg,dP_dOmega_inside,dP_dOmega_outside\n";
            char buf[96];
            for (std::size_t i = 0; i < P.theta_axis.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", P.theta_axis[i] * 180.0 / kPi, P.inside[i],
                              P.outside[i]);
                os << buf;
            }
            std::printf("theta_CR = %.3f deg, theta_crit = %.3f deg\n", a.theta_cr * 180.0 / kPi,
                        a.theta_crit * 180.0 / kPi);
            std::printf("kL window [%.4f, %.4f]; P_in = %.4g, P_out = %.4g\n", P.kl_min, P.kl_max, P.p_in_total,
                        P.p_out_total);
        } else if (*deflect_cmd) {
            const RunManifest m = manifest_from(defl_opts);
            const auto ctx = KinematicContext::from_scenario(m.scenario);
            const double d2r = kPi / 180.0;
            const auto g = angle_density_grid(ctx, phig_lo * d2r, phig_hi * d2r, n_g, phie_lo * 1e-6, phie_hi * 1e-6, n_e);
            auto os = open_out(m.output_dir, "deflection_density.csv");
            write_angle_grid_csv(os, g, m.hash());
            const double th = characteristic_angles(m.scenario).theta_cr;
            const double Emid = m.scenario.E_min + 0.5 * (m.scenario.E_max - m.scenario.E_min);
            std::printf("phi_e(theta_CR, %.3f eV) = %.4f urad\n", Emid, 1e6 * electron_angle_from_photon(th, Emid, ctx));
        } else if (*robust_cmd) {
            auto os = open_out(rob_dir, "robustness.csv");
            os << "sigma_x_um,sigma_p_hbar_per_um,T_x_um,measure,T_x_minus_um,T_x_plus_um\n";
            char buf[160];
            for (double sx : parse_list(sx_list))
                for (double sp : parse_list(sp_list)) {
                    double T = rob_Tx, M = 0.0;
                    const auto iv = sp > 0.0 ? feasible_period_interval(sx, sp) : std::nullopt;
                    if (T > 0.0) {
                        M = robustness_measure(sx, sp, T);
                    } else {
                        const auto row = robustness_point(sx, sp);
                        T = row.best_Tx;
                        M = row.best_measure;
                    }
                    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%s,%s\n", sx, sp, T, M,
                                  iv ? std::to_string(iv->first).c_str() : "nan",
                                  iv ? std::to_string(iv->second).c_str() : "nan");
                    os << buf;
                }
            std::printf("robustness grid written to %s\n", (std::filesystem::path(rob_dir) / "robustness.csv").string().c_str());
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "convergence error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "output error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
