#include "epr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "epr/constants.hpp"

namespace epr {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size() || !std::isfinite(out))
        throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ValidationError("config: '" + key + "' expects an integer");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config: '" + key + "' expects true/false, got '" + v + "'");
}

struct Field {
    std::string key;
    std::function<void(RunManifest&, const std::string&)> set;
    std::function<std::string(const RunManifest&)> get;
    bool hashed = true;
};

#define EPR_DOUBLE(name, expr)                                                                    \
    Field {                                                                                       \
        name, [](RunManifest& m, const std::string& v) { m.expr = to_double(name, v); },          \
            [](const RunManifest& m) { return fmt(m.expr); }                                      \
    }
#define EPR_INT(name, expr)                                                                       \
    Field {                                                                                       \
        name, [](RunManifest& m, const std::string& v) { m.expr = to_int(name, v); },             \
            [](const RunManifest& m) { return std::to_string(m.expr); }                           \
    }
#define EPR_BOOL(name, expr)                                                                      \
    Field {                                                                                       \
        name, [](RunManifest& m, const std::string& v) { m.expr = to_bool(name, v); },            \
            [](const RunManifest& m) { return std::string(m.expr ? "true" : "false"); }           \
    }
#define EPR_STRING(name, expr, hashed_)                                                           \
    Field {                                                                                       \
        name, [](RunManifest& m, const std::string& v) { m.expr = v; },                           \
            [](const RunManifest& m) { return m.expr; }, hashed_                                  \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        EPR_DOUBLE("L_z", scenario.L_z),
        EPR_DOUBLE("n_refr", scenario.n_refr),
        EPR_DOUBLE("E_kin", scenario.E_kin),
        Field{"beta",
              [](RunManifest& m, const std::string& v) {
                  if (v == "auto") m.scenario.beta_override.reset();
                  else m.scenario.beta_override = to_double("beta", v);
              },
              [](const RunManifest& m) {
                  return m.scenario.beta_override ? fmt(*m.scenario.beta_override) : std::string("auto");
              }},
        EPR_DOUBLE("dp_rel", scenario.dp_rel),
        EPR_DOUBLE("E_min", scenario.E_min),
        EPR_DOUBLE("E_max", scenario.E_max),
        EPR_DOUBLE("k_x_max", scenario.k_x_max),
        EPR_DOUBLE("k_y_min", scenario.k_y_min),
        EPR_DOUBLE("k_y_max", scenario.k_y_max),
        EPR_DOUBLE("x_max", scenario.x_max),
        EPR_INT("n_kx", scenario.grid.n_kx),
        EPR_INT("n_ky", scenario.grid.n_ky),
        EPR_INT("n_kz", scenario.grid.n_kz),
        EPR_INT("n_x", scenario.grid.n_x),
        EPR_INT("n_p", density.n_p),
        EPR_INT("profile_oversample", density.profile_oversample),
        EPR_DOUBLE("fwhm_x_e", resolution.fwhm_x_e),
        EPR_DOUBLE("fwhm_p_e", resolution.fwhm_p_e),
        EPR_DOUBLE("fwhm_x_gamma", resolution.fwhm_x_g),
        EPR_DOUBLE("fwhm_p_gamma", resolution.fwhm_p_g),
        EPR_DOUBLE("T_x", T_x),
        EPR_DOUBLE("x_center", x_center),
        Field{"p_center",
              [](RunManifest& m, const std::string& v) {
                  if (v == "auto") m.p_center.reset();
                  else m.p_center = to_double("p_center", v);
              },
              [](const RunManifest& m) { return m.p_center ? fmt(*m.p_center) : std::string("auto"); }},
        EPR_BOOL("whole_periods", optimizer.binning.whole_periods),
        EPR_BOOL("xx_infinite_window", optimizer.binning.use_profile),
        EPR_BOOL("optimize", optimize),
        EPR_BOOL("optimize_centers", optimizer.optimize_centers),
        EPR_DOUBLE("Tx_lo", optimizer.Tx_lo),
        EPR_DOUBLE("Tx_hi", optimizer.Tx_hi),
        EPR_DOUBLE("log_tol", optimizer.log_tol),
        EPR_INT("n_starts", optimizer.n_starts),
        EPR_INT("n_phase", optimizer.n_phase),
        EPR_STRING("mode", mode, true),
        EPR_STRING("counts_xx", counts_xx, true),
        EPR_STRING("counts_pp", counts_pp, true),
        EPR_STRING("counts_xp", counts_xp, true),
        EPR_STRING("counts_px", counts_px, true),
        EPR_STRING("output_dir", output_dir, false),
        EPR_STRING("kernel_cache", kernel_cache, false),
        Field{"write_densities", [](RunManifest& m, const std::string& v) { m.write_densities = to_bool("write_densities", v); },
              [](const RunManifest& m) { return std::string(m.write_densities ? "true" : "false"); }, false},
        Field{"write_kernel", [](RunManifest& m, const std::string& v) { m.write_kernel = to_bool("write_kernel", v); },
              [](const RunManifest& m) { return std::string(m.write_kernel ? "true" : "false"); }, false},
        Field{"seed",
              [](RunManifest& m, const std::string& v) {
                  const double d = to_double("seed", v);
                  if (d < 0 || d != std::floor(d)) throw ValidationError("config: 'seed' expects a non-negative integer");
                  m.seed = static_cast<std::uint64_t>(d);
              },
              [](const RunManifest& m) { return std::to_string(m.seed); }},
    };
    return f;
}

#undef EPR_DOUBLE
#undef EPR_INT
#undef EPR_BOOL
#undef EPR_STRING

const Field& find_field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ValidationError("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

void RunManifest::set(const std::string& key, const std::string& value) {
    if (key == "resolution") {
        if (value == "ideal") resolution = ResolutionProfile::ideal();
        else if (value == "experimental") resolution = ResolutionProfile::experimental();
        else throw ValidationError("config: resolution preset must be 'ideal' or 'experimental'");
        return;
    }
    find_field(key).set(*this, trim(value));
}

std::string RunManifest::get(const std::string& key) const { return find_field(key).get(*this); }

const std::vector<std::string>& RunManifest::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& f : fields()) out.push_back(f.key);
        return out;
    }();
    return k;
}

std::string RunManifest::canonical() const {
    std::string s;
    for (const auto& f : fields())
        if (f.hashed) s += f.key + "=" + f.get(*this) + ";";
    return s;
}

std::string RunManifest::hash() const { return hex64(fnv1a(canonical())); }

void RunManifest::validate() const {
    if (mode != "physics" && mode != "counts") throw ValidationError("manifest: mode must be 'physics' or 'counts'");
    if (mode == "counts") {
        for (const auto* p : {&counts_xx, &counts_pp, &counts_xp, &counts_px})
            if (p->empty()) throw ValidationError("manifest: counts mode needs counts_xx, counts_pp, counts_xp, counts_px");
        return;
    }
    epr::validate(scenario);
    for (double f : {resolution.fwhm_x_e, resolution.fwhm_p_e, resolution.fwhm_x_g, resolution.fwhm_p_g})
        if (!(f >= 0.0)) throw ValidationError("manifest: FWHMs must be >= 0");
    if (!(T_x > 0.0)) throw ValidationError("manifest: T_x must be > 0");
    if (density.n_p < 16) throw ValidationError("manifest: n_p must be >= 16");
    if (density.profile_oversample < 2) throw ValidationError("manifest: profile_oversample must be >= 2");
}

std::map<std::string, std::string> parse_config(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file '" + path + "'");
    RunManifest m;
    // Presets first so that explicit FWHM keys override them.
    const auto kv = parse_config(is);
    if (auto it = kv.find("resolution"); it != kv.end()) m.set(it->first, it->second);
    for (const auto& [k, v] : kv)
        if (k != "resolution") m.set(k, v);
    return m;
}

// ---- pipeline ----

MomentumKernel obtain_kernel(const RunManifest& m, std::vector<std::string>& stages,
                             std::optional<KernelBuildReport>& build) {
    const std::string want = hex64(fnv1a(canonical_string(m.scenario)));
    if (!m.kernel_cache.empty() && std::filesystem::exists(m.kernel_cache)) {
        std::ifstream is(m.kernel_cache);
        MomentumKernel K = read_kernel_csv(is);
        if (K.scenario_hash == want) {
            stages.push_back("kernel:cache");
            return K;
        }
    }
    stages.push_back("kernel:quadrature");
    KernelBuildReport rep;
    MomentumKernel K = build_kernel(m.scenario, &rep);
    build = rep;
    if (!m.kernel_cache.empty()) {
        const auto parent = std::filesystem::path(m.kernel_cache).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream os(m.kernel_cache);
        if (!os) throw ValidationError("cannot write kernel cache '" + m.kernel_cache + "'");
        write_kernel_csv(os, K);
    }
    return K;
}

namespace {

JointProbTable read_counts_file(const std::string& path, Basis e, Basis g) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open counts file '" + path + "'");
    int d = 0;
    const auto counts = read_counts_csv(is, d);
    JointProbTable t = counts_to_probabilities(counts, d);
    t.basis_e = e;
    t.basis_g = g;
    return t;
}

CertifyResult certify_counts(const RunManifest& m) {
    CertifyResult r;
    r.stages.push_back("counts:ingest");
    const auto xx = read_counts_file(m.counts_xx, Basis::Position, Basis::Position);
    const auto pp = read_counts_file(m.counts_pp, Basis::Momentum, Basis::Momentum);
    const auto xp = read_counts_file(m.counts_xp, Basis::Position, Basis::Momentum);
    const auto px = read_counts_file(m.counts_px, Basis::Momentum, Basis::Position);
    r.stages.push_back("criteria");
    r.report = certify(pp, xx, xp, px);
    r.T_x = m.T_x;
    r.T_p = 4.0 * kPi / m.T_x;
    r.x_center = m.x_center;
    r.p_center = m.p_center.value_or(-0.25 * r.T_p);
    return r;
}

} // namespace

CertifyResult run_certify(const RunManifest& m, const MomentumKernel& K) {
    m.validate();
    if (m.mode == "counts") return certify_counts(m);
    CertifyResult r;
    DensityOptions dopt = m.density;
    dopt.n_x = m.scenario.grid.n_x;
    const double X = m.scenario.x_max;

    r.stages.push_back("densities");
    JointDensity pp = density_pp(K);
    JointDensity xx = density_xx(K, X, dopt);
    JointDensity xp = density_mixed(K, MixedKind::XePg, X, dopt);
    JointDensity px = density_mixed(K, MixedKind::PeXg, X, dopt);
    r.stages.push_back("psf");
    pp = apply_psf(pp, m.resolution, dopt.n_p);
    xx = apply_psf(xx, m.resolution, dopt.n_p);
    xp = apply_psf(xp, m.resolution, dopt.n_p);
    px = apply_psf(px, m.resolution, dopt.n_p);

    r.T_x = m.T_x;
    r.x_center = m.x_center;
    r.p_center = m.p_center.value_or(-kPi / m.T_x);  // −T_p/4
    if (m.optimize) {
        r.stages.push_back("optimize");
        WitnessDensities w{pp, xx};
        r.optimization = optimize_periods(w, m.optimizer);
        r.T_x = r.optimization->best_Tx;
        if (m.optimizer.optimize_centers) {
            r.x_center = r.optimization->x_center;
            r.p_center = r.optimization->p_center;
        } else {
            r.x_center = 0.0;
            r.p_center = 0.0;
        }
    }
    const MubPair pair = MubPair::from_position_period(r.T_x, 2, 1, r.x_center, r.p_center);
    r.T_p = pair.mom.T;

    r.stages.push_back("binning");
    const BinningOptions& bo = m.optimizer.binning;
    const auto t_pp = joint_probabilities(pp, pair.mom, pair.mom, bo);
    const auto t_xx = joint_probabilities(xx, pair.pos, pair.pos, bo);
    const auto t_xp = joint_probabilities(xp, pair.pos, pair.mom, bo);
    const auto t_px = joint_probabilities(px, pair.mom, pair.pos, bo);
    r.stages.push_back("criteria");
    r.report = certify(t_pp, t_xx, t_xp, t_px, ppt_negativity(K));
    if (m.write_densities) r.densities = {pp, xx, xp, px};
    return r;
}

CertifyResult run_certify(const RunManifest& m) {
    m.validate();
    if (m.mode == "counts") return certify_counts(m);
    std::vector<std::string> stages;
    std::optional<KernelBuildReport> build;
    MomentumKernel K = obtain_kernel(m, stages, build);
    CertifyResult r = run_certify(m, K);
    stages.insert(stages.end(), r.stages.begin(), r.stages.end());
    r.stages = std::move(stages);
    r.kernel_build = build;
    r.kernel = std::move(K);
    return r;
}

// ---- sweeps ----

std::vector<SweepRow> run_sweep(const RunManifest& base, const std::string& axis,
                                const std::vector<std::string>& values) {
    if (axis == "resolution" ||
        std::find(RunManifest::keys().begin(), RunManifest::keys().end(), axis) == RunManifest::keys().end())
        throw ValidationError("sweep: unknown axis '" + axis + "'");
    std::vector<SweepRow> rows;
    std::optional<MomentumKernel> K;
    std::string K_hash;
    for (const auto& v : values) {
        RunManifest m = base;
        m.set(axis, v);
        m.validate();
        CertifyResult r;
        if (m.mode == "counts") {
            r = run_certify(m);
        } else {
            const std::string h = canonical_string(m.scenario);
            if (!K || h != K_hash) {
                std::vector<std::string> st;
                std::optional<KernelBuildReport> b;
                K = obtain_kernel(m, st, b);
                K_hash = h;
            }
            r = run_certify(m, *K);
        }
        const auto& c = r.report;
        rows.push_back({v, c.witness.sum, c.fidelity, c.formation.ef,
                        correlated_sum(c.xx, c.witness.labelings[0]), correlated_sum(c.pp, c.witness.labelings[1]),
                        c.mixed_max_deviation});
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& axis, const std::vector<SweepRow>& rows,
                     const std::string& manifest_hash) {
    os << "# parameter sweep; manifest=" << manifest_hash << "\n";
    os << axis << ",witness_sum,fidelity_bound,ef_bound_nat,corr_xx,corr_pp,mixed_max_deviation\n";
    for (const auto& r : rows)
        os << r.value << "," << fmt(r.witness_sum) << "," << fmt(r.fidelity) << "," << fmt(r.ef) << ","
           << fmt(r.corr_xx) << "," << fmt(r.corr_pp) << "," << fmt(r.mixed_max_deviation) << "\n";
}

RobustnessRow robustness_point(double sx, double sp) {
    RobustnessRow row{sx, sp, 0.0, 0.0, feasible_period_interval(sx, sp)};
    // The measure is single-peaked in ln T_x; bracket on a coarse scan, then golden section.
    const double center = sp > 0.0 ? 2.0 * std::sqrt(kPi * kRobustnessA) / sp : 10.0;
    const int n = 121;
    double lo = std::log(center) - 6.0, hi = std::log(center) + 6.0;
    int best = 0;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = robustness_measure(sx, sp, std::exp(lo + (hi - lo) * i / (n - 1)));
        if (v[i] > v[best]) best = i;
    }
    const double step = (hi - lo) / (n - 1);
    double a = lo + std::max(0, best - 1) * step, b = lo + std::min(n - 1, best + 1) * step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    auto f = [&](double L) { return robustness_measure(sx, sp, std::exp(L)); };
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
        if (fc >= fd) {
            b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
        }
    }
    row.best_Tx = std::exp(0.5 * (a + b));
    row.best_measure = f(0.5 * (a + b));
    return row;
}

} // namespace epr
