#include <cstdio>
#include <filesystem>
#include <fstream>

#include "epr/constants.hpp"
#include "epr/pipeline.hpp"
#include "json.hpp"

namespace epr {

namespace {

using json = nlohmann::ordered_json;

json table_json(const JointProbTable& t, double T_e, double T_g) {
    json rows = json::array();
    for (int i = 0; i < t.d; ++i) {
        json row = json::array();
        for (int j = 0; j < t.d; ++j) row.push_back(t.at(i, j));
        rows.push_back(row);
    }
    json j = {{"basis_e", basis_name(t.basis_e)}, {"basis_gamma", basis_name(t.basis_g)},
              {"T_e", T_e}, {"T_gamma", T_g}, {"p", rows}};
    if (!t.stderr_.empty()) j["stderr"] = t.stderr_;
    j["warnings"] = t.warnings;
    return j;
}

} // namespace

std::string report_json(const RunManifest& m, const CertifyResult& r) {
    const auto& c = r.report;
    json manifest = json::object();
    for (const auto& k : RunManifest::keys()) manifest[k] = m.get(k);

    auto period = [&](Basis b) { return b == Basis::Position ? r.T_x : r.T_p; };
    json tables = {
        {"x_x", table_json(c.xx, period(c.xx.basis_e), period(c.xx.basis_g))},
        {"p_p", table_json(c.pp, period(c.pp.basis_e), period(c.pp.basis_g))},
        {"x_p", table_json(c.xp, period(c.xp.basis_e), period(c.xp.basis_g))},
        {"p_x", table_json(c.px, period(c.px.basis_e), period(c.px.basis_g))},
    };

    json j;
    j["schema"] = "epr-certification-report";
    j["schema_version"] = kReportSchemaVersion;
    j["constants"] = {{"hbar_c_eV_um", kHbarC}, {"electron_rest_energy_eV", kElectronRestEnergy},
                      {"fine_structure_alpha", kAlpha}};
    j["manifest_hash"] = m.hash();
    j["manifest"] = manifest;
    j["mode"] = m.mode;
    j["stages"] = r.stages;
    j["binning"] = {{"d", 2}, {"u", 1}, {"T_x_um", r.T_x}, {"T_p_hbar_per_um", r.T_p},
                    {"x_center_um", r.x_center}, {"p_center_hbar_per_um", r.p_center},
                    {"whole_periods", m.optimizer.binning.whole_periods},
                    {"xx_infinite_window", m.optimizer.binning.use_profile}};
    j["tables"] = tables;
    j["witness"] = {{"sum", c.witness.sum}, {"threshold", c.witness.threshold},
                    {"entangled", c.entangled_witness}, {"labelings", c.witness.labelings}};
    j["fidelity"] = {{"bound", c.fidelity}, {"threshold", 0.5}, {"entangled", c.entangled_fidelity}};
    j["formation"] = {{"I", c.formation.I}, {"ef_bound_nat", c.formation.ef}, {"ef_bound_log2", c.formation.ef_log2}};
    j["negativity"] = c.negativity ? json{{"value", *c.negativity}, {"entangled", c.entangled_negativity}} : json(nullptr);
    j["mixed_max_deviation"] = c.mixed_max_deviation;
    if (r.optimization) {
        const auto& o = *r.optimization;
        j["optimization"] = {{"best_T_x_um", o.best_Tx}, {"best_T_p_hbar_per_um", o.best_Tp},
                             {"x_center_um", o.x_center}, {"p_center_hbar_per_um", o.p_center},
                             {"objective", o.objective}, {"certification_possible", o.certification_possible},
                             {"evaluations", o.trace.size()}};
    } else {
        j["optimization"] = nullptr;
    }
    if (r.kernel) {
        j["kernel"] = {{"nodes", r.kernel->size()}, {"k_max_rad_per_um", r.kernel->kmax()},
                       {"norm", r.kernel->norm}, {"scenario_hash", r.kernel->scenario_hash}};
        if (r.kernel_build)
            j["kernel"]["build"] = {{"elements", r.kernel_build->elements},
                                    {"not_converged", r.kernel_build->not_converged},
                                    {"max_rel_change", r.kernel_build->max_rel_change}};
    } else {
        j["kernel"] = nullptr;
    }
    return j.dump(2) + "\n";
}

void write_density_csv(std::ostream& os, const JointDensity& d, const std::string& manifest_hash) {
    os << "# joint probability per cell; manifest=" << manifest_hash << "\n";
    os << d.e.label << "_" << d.e.unit << "," << d.g.label << "_" << d.g.unit << ",probability\n";
    char buf[96];
    for (int i = 0; i < d.e.n; ++i)
        for (int j = 0; j < d.g.n; ++j) {
            const double v = d.at(i, j);
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", d.e.center(i), d.g.center(j), v);
            os << buf;
        }
}

void write_artifacts(const RunManifest& m, const CertifyResult& r) {
    namespace fs = std::filesystem;
    fs::create_directories(m.output_dir);
    const fs::path dir(m.output_dir);
    const std::string h = m.hash();
    auto open = [&](const std::string& name) {
        std::ofstream os(dir / name);
        if (!os) throw ValidationError("cannot write '" + (dir / name).string() + "'");
        return os;
    };
    {
        auto os = open("report.json");
        os << report_json(m, r);
    }
    {
        auto os = open("tables.csv");
        os << "# joint probability tables; manifest=" << h << "\n";
        os << "table,basis_e,basis_gamma,n_e,n_gamma,probability\n";
        const std::pair<const char*, const JointProbTable*> ts[] = {
            {"x_x", &r.report.xx}, {"p_p", &r.report.pp}, {"x_p", &r.report.xp}, {"p_x", &r.report.px}};
        char buf[64];
        for (const auto& [name, t] : ts)
            for (int i = 0; i < t->d; ++i)
                for (int j = 0; j < t->d; ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g", t->at(i, j));
                    os << name << "," << basis_name(t->basis_e) << "," << basis_name(t->basis_g) << "," << i
                       << "," << j << "," << buf << "\n";
                }
    }
    if (r.optimization) {
        auto os = open("optimization_trace.csv");
        os << "# optimizer trace; manifest=" << h << "\n";
        os << "T_x_um,T_p_hbar_per_um,objective\n";
        char buf[96];
        for (const auto& t : r.optimization->trace) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t.T_x, t.T_p, t.objective);
            os << buf;
        }
    }
    if (m.write_densities) {
        const char* names[] = {"density_p_p.csv", "density_x_x.csv", "density_x_p.csv", "density_p_x.csv"};
        for (std::size_t i = 0; i < r.densities.size(); ++i) {
            auto os = open(names[i]);
            write_density_csv(os, r.densities[i], h);
        }
    }
    if (m.write_kernel && r.kernel) {
        auto os = open("kernel.csv");
        write_kernel_csv(os, *r.kernel);
    }
    {
        auto os = open("stages.log");
        for (const auto& s : r.stages) os << s << "\n";
    }
}

} // namespace epr
