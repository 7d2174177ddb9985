#include "epr/cherenkov_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <gsl/gsl_sf_expint.h>

#include "epr/constants.hpp"
#include "epr/quadrature.hpp"

namespace epr {

CharacteristicAngles characteristic_angles(double beta, double n_refr) {
    if (!(n_refr > 1.0)) throw ValidationError("characteristic_angles: n_refr must exceed 1");
    if (!(beta * n_refr > 1.0))
        throw ValidationError("characteristic_angles: beta * n_refr <= 1, no Cherenkov emission");
    return {std::acos(1.0 / (beta * n_refr)), std::asin(1.0 / n_refr)};
}

CharacteristicAngles characteristic_angles(const PhysicalScenario& s) {
    return characteristic_angles(s.beta(), s.n_refr);
}

namespace {
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}
} // namespace

double cherenkov_amplitude(const Vec3& k, double n_refr, double beta, double L_z) {
    const double kperp = std::hypot(k.x, k.y);
    const double kmag = std::sqrt(kperp * kperp + k.z * k.z);
    if (!(kmag > 0.0)) throw ValidationError("cherenkov_amplitude: k must be non-zero");
    if (kperp == 0.0) return 0.0;
    const double pref = std::sqrt(kAlpha / (2.0 * kPi * kPi * n_refr));
    const double arg = 0.5 * L_z * (k.z - kmag / (beta * n_refr));
    return pref * kperp / std::pow(kmag, 1.5) * L_z * sinc(arg);
}

double cherenkov_amplitude(const Vec3& k, const PhysicalScenario& s) {
    return cherenkov_amplitude(k, s.n_refr, s.beta(), s.L_z);
}

double fresnel_tau_parallel(double theta, double n) {
    const double s = n * std::sin(theta);
    if (theta < 0.0 || s > 1.0) return 0.0;
    const double c = std::cos(theta);
    return 2.0 * n * c / (c + n * std::sqrt(std::max(0.0, 1.0 - s * s)));
}

double fresnel_power_transmission(double theta, double n) {
    const double s = n * std::sin(theta);
    if (theta < 0.0 || s > 1.0) return 0.0;
    const double c = std::cos(theta);
    const double ct = std::sqrt(std::max(0.0, 1.0 - s * s));
    const double den = c + n * ct;
    return 4.0 * n * c * ct / (den * den);
}

// ---- integration region ----

double IntegrationRegion::kz_lo(double ky) const {
    return std::sqrt(std::max(kv_min2 - kx_small * kx_small - ky * ky, 0.0));
}

double IntegrationRegion::kz_hi(double ky) const {
    return std::sqrt(std::max(kv_max2 - kx_large * kx_large - ky * ky, 0.0));
}

IntegrationRegion integration_region(double k1x, double k2x, const PhysicalScenario& s) {
    IntegrationRegion r;
    r.kx_small = std::min(std::abs(k1x), std::abs(k2x));
    r.kx_large = std::max(std::abs(k1x), std::abs(k2x));
    const double kvmin = s.k_vac_min(), kvmax = s.k_vac_max();
    r.kv_min2 = kvmin * kvmin;
    r.kv_max2 = kvmax * kvmax;
    const double budget = r.kv_max2 - r.kx_large * r.kx_large;
    if (budget <= 0.0) return r;
    r.ky_lo = s.k_y_min;
    r.ky_hi = std::min(std::sqrt(budget), s.ky_cap());
    // If the window is narrower than the spread of |k1x|, |k2x|, the k'_z
    // interval is void until its lower bound has clamped to zero.
    const double gap = (r.kv_max2 - r.kv_min2) - (r.kx_large * r.kx_large - r.kx_small * r.kx_small);
    if (gap <= 0.0) {
        const double clamp = std::sqrt(std::max(r.kv_min2 - r.kx_small * r.kx_small, 0.0));
        r.ky_lo = std::max(r.ky_lo, clamp);
    }
    r.empty = !(r.ky_hi > r.ky_lo);
    return r;
}

// ---- integrand ----

KernelIntegrand::KernelIntegrand(const PhysicalScenario& s)
    : n_(s.n_refr), beta_(s.beta()), Lz_(s.L_z) {
    amp_pref_ = std::sqrt(kAlpha / (2.0 * kPi * kPi * n_));
    const double dp = s.momentum_spread();
    gauss_inv_ = 1.0 / (8.0 * beta_ * beta_ * n_ * n_ * dp * dp);
    const double a = s.k_vac_min(), b = s.k_vac_max();
    kv_min2_ = a * a * (1.0 - 1e-12);
    kv_max2_ = b * b * (1.0 + 1e-12);
}

// 𝒜(k) τ∥(θ) / k_z for one photon; also returns in-medium k_z and |k|.
double KernelIntegrand::amp_factor(double kx2, double ky, double kzp, double& kz_med,
                                   double& k_med) const {
    const double kperp2 = kx2 + ky * ky;
    const double kv = std::sqrt(kperp2 + kzp * kzp);
    k_med = n_ * kv;
    kz_med = std::sqrt((n_ * n_ - 1.0) * kperp2 + n_ * n_ * kzp * kzp);
    if (kperp2 == 0.0 || kz_med == 0.0) return 0.0;
    const double amp = amp_pref_ * std::sqrt(kperp2) / (k_med * std::sqrt(k_med)) * Lz_ *
                       sinc(0.5 * Lz_ * (kz_med - k_med / (beta_ * n_)));
    const double cos_in = kz_med / k_med;
    const double cos_out = kzp / kv;
    const double tau = 2.0 * n_ * cos_in / (cos_in + n_ * cos_out);
    return amp * tau / kz_med;
}

double KernelIntegrand::operator()(double k1x, double k2x, double ky, double kzp) const {
    const double kv1 = k1x * k1x + ky * ky + kzp * kzp;
    const double kv2 = k2x * k2x + ky * ky + kzp * kzp;
    if (kv1 < kv_min2_ || kv1 > kv_max2_ || kv2 < kv_min2_ || kv2 > kv_max2_) return 0.0;
    double kz1, k1, kz2, k2;
    const double a1 = amp_factor(k1x * k1x, ky, kzp, kz1, k1);
    const double a2 = amp_factor(k2x * k2x, ky, kzp, kz2, k2);
    const double dk = k1 - k2;
    const double n2 = n_ * n_;
    return a1 * a2 * n2 * n2 * kzp * kzp * std::exp(-dk * dk * gauss_inv_);
}

// ---- kernel element ----

namespace {

// Nested Simpson on n_ky × n_kz nodes. The outer variable is mapped as
// k_y = hi − (hi − lo)·u², which absorbs the square-root collapse of the
// k'_z interval at the energy cap. Also returns the estimate using every
// other node of both axes (the "halved" grid) through `coarse`.
double nested_simpson(const KernelIntegrand& g, const IntegrationRegion& r, double k1x, double k2x,
                      int n_ky, int n_kz, double* coarse) {
    const auto wu = simpson_weights(n_ky, 1.0);
    const auto wu_c = simpson_weights((n_ky + 1) / 2, 1.0);
    const auto wz = simpson_weights(n_kz, 1.0);
    const auto wz_c = simpson_weights((n_kz + 1) / 2, 1.0);
    const double span = r.ky_hi - r.ky_lo;
    double fine = 0.0, crude = 0.0;
    for (int i = 0; i < n_ky; ++i) {
        const double u = static_cast<double>(i) / (n_ky - 1);
        const double ky = r.ky_hi - span * u * u;
        const double jac = 2.0 * span * u;
        if (jac == 0.0) continue;
        const double zlo = r.kz_lo(ky), zhi = r.kz_hi(ky);
        const double len = zhi - zlo;
        if (len <= 0.0) continue;
        double inner = 0.0, inner_c = 0.0;
        for (int j = 0; j < n_kz; ++j) {
            const double kzp = zlo + len * static_cast<double>(j) / (n_kz - 1);
            const double v = g(k1x, k2x, ky, kzp);
            inner += wz[j] * v;
            if (j % 2 == 0) inner_c += wz_c[j / 2] * v;
        }
        fine += wu[i] * jac * len * inner;
        if (i % 2 == 0) crude += wu_c[i / 2] * jac * len * inner_c;
    }
    if (coarse) *coarse = crude;
    return fine;
}

} // namespace

double kernel_element_fixed(double k1x, double k2x, const PhysicalScenario& s, int n_ky, int n_kz) {
    const auto r = integration_region(k1x, k2x, s);
    if (r.empty) return 0.0;
    KernelIntegrand g(s);
    return nested_simpson(g, r, k1x, k2x, n_ky, n_kz, nullptr);
}

ElementResult kernel_element(double k1x, double k2x, const PhysicalScenario& s,
                             const ElementOptions& opt) {
    ElementResult res;
    const auto r = integration_region(k1x, k2x, s);
    if (r.empty) return res;
    KernelIntegrand g(s);
    int nky = s.grid.n_ky, nkz = s.grid.n_kz;
    for (;;) {
        double coarse = 0.0;
        const double fine = nested_simpson(g, r, k1x, k2x, nky, nkz, &coarse);
        const double diff = std::abs(fine - coarse);
        res.value = fine;
        res.n_ky = nky;
        res.n_kz = nkz;
        res.rel_change = fine != 0.0 ? diff / std::abs(fine) : (diff > 0.0 ? 1.0 : 0.0);
        if (diff <= opt.rel_tol * std::abs(fine) + opt.abs_tol) {
            res.converged = true;
            return res;
        }
        if (2 * nky - 1 > opt.max_nodes || 2 * nkz - 1 > opt.max_nodes) {
            res.converged = false;
            return res;
        }
        nky = 2 * nky - 1;
        nkz = 2 * nkz - 1;
    }
}

// ---- kernel ----

namespace {
// Fractional index of |k| on the axis; false if outside.
bool locate(const std::vector<double>& axis, double k, int& i0, double& t) {
    const double a = std::abs(k);
    const int n = static_cast<int>(axis.size());
    const double h = axis[1] - axis[0];
    if (a > axis.back() * (1.0 + 1e-14)) return false;
    const double x = a / h;
    i0 = std::min(static_cast<int>(x), n - 2);
    t = std::clamp(x - i0, 0.0, 1.0);
    return true;
}
} // namespace

double MomentumKernel::mirrored(double k1, double k2) const {
    int i, j;
    double ti, tj;
    if (!locate(k_axis, k1, i, ti) || !locate(k_axis, k2, j, tj)) return 0.0;
    return (1 - ti) * (1 - tj) * at(i, j) + ti * (1 - tj) * at(i + 1, j) + (1 - ti) * tj * at(i, j + 1) +
           ti * tj * at(i + 1, j + 1);
}

double MomentumKernel::diagonal(double k) const {
    int i;
    double t;
    if (!locate(k_axis, k, i, t)) return 0.0;
    return (1 - t) * at(i, i) + t * at(i + 1, i + 1);
}

double MomentumKernel::trace() const {
    std::vector<double> d(k_axis.size());
    for (int i = 0; i < size(); ++i) d[i] = at(i, i);
    return 2.0 * simpson(d, dk());
}

MomentumKernel build_kernel(const PhysicalScenario& s, KernelBuildReport* report,
                            const ElementOptions& opt) {
    validate(s);
    const int n = s.grid.n_kx;
    MomentumKernel K;
    K.k_axis = linspace(0.0, s.kx_cutoff(), n);
    K.f.assign(static_cast<std::size_t>(n) * n, 0.0);
    K.scenario_hash = hex64(fnv1a(canonical_string(s)));

    KernelBuildReport rep;
    std::vector<ElementResult> diag(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) diag[i] = kernel_element(K.k_axis[i], K.k_axis[i], s, opt);
    for (int i = 0; i < n; ++i) K.at(i, i) = diag[i].value;

    // Off-diagonal elements: tolerance floor tied to the geometric mean of
    // the two diagonal entries, so near-zero coherences do not stall refinement.
    std::vector<ElementResult> off(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            ElementOptions o = opt;
            o.abs_tol = std::max(opt.abs_tol, 1e-5 * std::sqrt(std::abs(diag[i].value * diag[j].value)));
            off[static_cast<std::size_t>(i) * n + j] = kernel_element(K.k_axis[i], K.k_axis[j], s, o);
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto& e = diag[i];
        ++rep.elements;
        if (!e.converged) ++rep.not_converged;
        rep.max_rel_change = std::max(rep.max_rel_change, e.value != 0.0 ? e.rel_change : 0.0);
        for (int j = i + 1; j < n; ++j) {
            const auto& o = off[static_cast<std::size_t>(i) * n + j];
            K.at(i, j) = K.at(j, i) = o.value;
            ++rep.elements;
            if (!o.converged) ++rep.not_converged;
        }
    }
    if (report) *report = rep;
    if (rep.not_converged > 0) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "build_kernel: %d of %d elements did not converge", rep.not_converged,
                      rep.elements);
        throw ConvergenceError(msg);
    }

    const double N = K.trace();
    if (!std::isfinite(N) || N <= 0.0) throw ConvergenceError("build_kernel: normalisation constant is not positive");
    K.norm = N;
    for (double& v : K.f) v /= N;
    return K;
}

double band_mass_fraction(const MomentumKernel& K, double band) {
    double in = 0.0, all = 0.0;
    for (int i = 0; i < K.size(); ++i)
        for (int j = 0; j < K.size(); ++j) {
            const double v = std::abs(K.at(i, j));
            all += v;
            if (std::abs(K.k_axis[i] - K.k_axis[j]) <= band * (1.0 + 1e-12)) in += v;
        }
    return all > 0.0 ? in / all : 0.0;
}

void write_kernel_csv(std::ostream& os, const MomentumKernel& K) {
    char buf[40];
    os << "# reduced momentum kernel; norm=";
    std::snprintf(buf, sizeof buf, "%.17g", K.norm);
    os << buf << "; scenario=" << K.scenario_hash << "\n";
    for (int i = 0; i < K.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", K.k_axis[i]);
        os << (i ? "," : "") << buf;
    }
    os << "\n";
    for (int i = 0; i < K.size(); ++i) {
        for (int j = 0; j < K.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", K.at(i, j));
            os << (j ? "," : "") << buf;
        }
        os << "\n";
    }
}

MomentumKernel read_kernel_csv(std::istream& is) {
    MomentumKernel K;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<double> v;
        std::stringstream ss(l);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        return v;
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto p = line.find("norm=");
            if (p != std::string::npos) K.norm = std::stod(line.substr(p + 5));
            const auto q = line.find("scenario=");
            if (q != std::string::npos) K.scenario_hash = line.substr(q + 9);
            continue;
        }
        if (K.k_axis.empty()) {
            K.k_axis = split(line);
            continue;
        }
        const auto row = split(line);
        if (row.size() != K.k_axis.size()) throw ValidationError("read_kernel_csv: ragged row");
        K.f.insert(K.f.end(), row.begin(), row.end());
    }
    if (K.k_axis.size() < 2 || K.f.size() != K.k_axis.size() * K.k_axis.size())
        throw ValidationError("read_kernel_csv: malformed kernel file");
    return K;
}

// ---- emission profile ----

double ci_bracket_over_u2(double a, double b, double u) {
    const double x = std::abs(u);
    if (b * x < 0.5) {
        // log(b/a) − Ci(bx) + Ci(ax) = −Σ_k (−1)^k (b^{2k} − a^{2k}) x^{2k} / (2k (2k)!)
        double sum = 0.0, fact = 1.0;
        double bp = 1.0, ap = 1.0, xp = 1.0;
        for (int k = 1; k <= 12; ++k) {
            fact *= (2.0 * k - 1.0) * (2.0 * k);
            bp *= b * b;
            ap *= a * a;
            const double term = (bp - ap) * xp / (2.0 * k * fact);
            sum += (k % 2 ? 1.0 : -1.0) * term;
            xp *= x * x;
        }
        return sum;
    }
    constexpr double euler_gamma = 0.57721566490153286;
    const double ci_b = gsl_sf_Ci(b * x);
    double bracket;
    if (a * x > 0.0) {
        bracket = std::log(b / a) - ci_b + gsl_sf_Ci(a * x);
    } else {
        bracket = euler_gamma + std::log(b * x) - ci_b;  // a → 0 limit
    }
    return bracket / (x * x);
}

double emission_density(double theta, double beta, double n, double kl_min, double kl_max) {
    const double s = std::sin(theta);
    const double u = std::cos(theta) - 1.0 / (beta * n);
    return kAlpha / (kPi * kPi * n) * s * s * ci_bracket_over_u2(kl_min, kl_max, u);
}

AngularProfile emission_profile(const PhysicalScenario& s, const ProfileOptions& opt) {
    validate(s);
    const auto ang = characteristic_angles(s);
    const double beta = s.beta(), n = s.n_refr;
    AngularProfile P;
    P.kl_min = opt.kl_min.value_or(n * s.k_vac_min() * s.L_z);
    P.kl_max = opt.kl_max.value_or(n * s.k_vac_max() * s.L_z);
    if (!(P.kl_max > P.kl_min) || P.kl_min < 0.0) throw ValidationError("emission_profile: need 0 <= kL_min < kL_max");

    const int m = std::max(opt.n_theta, 3);
    P.theta_axis = linspace(0.0, kPi / 2.0, m);
    P.inside.resize(m);
    P.outside.resize(m);
    for (int i = 0; i < m; ++i) {
        const double t = P.theta_axis[i];
        P.inside[i] = emission_density(t, beta, n, P.kl_min, P.kl_max);
        P.outside[i] = t <= ang.theta_crit ? P.inside[i] * fresnel_power_transmission(t, n) : 0.0;
    }

    // Integrals on dedicated grids split at θ_CR (peak) and θ_crit (sqrt edge).
    const double az = opt.full_azimuth ? 2.0 * kPi : 1.0;
    auto integrate = [&](double lo, double hi, bool transmitted) {
        const int q = 20001;
        const auto w = simpson_weights(q, hi - lo);
        double acc = 0.0;
        for (int i = 0; i < q; ++i) {
            const double t = lo + (hi - lo) * i / (q - 1);
            double v = emission_density(t, beta, n, P.kl_min, P.kl_max) * std::sin(t);
            if (transmitted) v *= fresnel_power_transmission(t, n);
            acc += w[i] * v;
        }
        return acc;
    };
    P.p_out_total = az * (integrate(0.0, ang.theta_cr, true) + integrate(ang.theta_cr, ang.theta_crit, true));
    P.p_in_total = az * (integrate(0.0, ang.theta_cr, false) + integrate(ang.theta_cr, kPi / 2.0, false));
    return P;
}

} // namespace epr
