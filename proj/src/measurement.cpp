#include "epr/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "epr/constants.hpp"
#include "epr/quadrature.hpp"

namespace epr {

const char* basis_name(Basis b) { return b == Basis::Position ? "position" : "momentum"; }

// ---- binning ----

PeriodicBinning::PeriodicBinning(double period, int outcomes, double origin)
    : T(period), d(outcomes), center(origin) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("PeriodicBinning: period must be > 0");
    if (d < 2) throw ValidationError("PeriodicBinning: need at least two outcomes");
}

int PeriodicBinning::outcome(double v) const {
    const double y = v - center;
    const double r = y - std::floor(y / T) * T;
    const int n = static_cast<int>(std::floor(r / width()));
    return std::clamp(n, 0, d - 1);
}

double PeriodicBinning::overlap(double a, double b, int n) const {
    if (b <= a) return 0.0;
    const double w = width();
    auto F = [&](double y) {
        const double periods = std::floor(y / T);
        const double r = y - periods * T;
        return periods * w + std::clamp(r - n * w, 0.0, w);
    };
    return std::max(0.0, F(b - center) - F(a - center));
}

double position_from_detector(double x_det, double A) {
    if (!(A > 0.0)) throw ValidationError("position_from_detector: magnification must be > 0");
    return x_det / A;
}

double momentum_from_detector(double x_det, double y_det, double A, double p_abs) {
    if (!(A > 0.0)) throw ValidationError("momentum_from_detector: magnification must be > 0");
    const double u = x_det / A, v = y_det / A;
    return p_abs * u / std::sqrt(u * u + v * v + 1.0);
}

int bin_outcome(double value, const PeriodicBinning& b) { return b.outcome(value); }

MubPair MubPair::from_position_period(double T_x, int d, int u, double x_cen, double p_cen) {
    if (!(T_x > 0.0)) throw ValidationError("MubPair: T_x must be > 0");
    if (u < 1) throw ValidationError("MubPair: u must be >= 1");
    MubPair m;
    m.u = u;
    m.pos = PeriodicBinning(T_x, d, x_cen);
    m.mom = PeriodicBinning(2.0 * kPi * d / (u * T_x), d, p_cen);
    m.check();
    return m;
}

void MubPair::check() const {
    if (pos.d != mom.d) throw ValidationError("MubPair: outcome counts differ");
    const int d = pos.d;
    for (int v = 1; v < d; ++v)
        if ((u * v) % d == 0) throw ValidationError("MubPair: u violates the coprimality condition");
    const double target = 2.0 * kPi * d / u;
    if (std::abs(pos.T * mom.T - target) > 1e-12 * target)
        throw ValidationError("MubPair: T_x * T_p differs from 2*pi*d/u");
}

// ---- ridge ----

double Ridge::value(double k) const {
    const double a = std::abs(k);
    const double h = k_nodes[1] - k_nodes[0];
    if (a > k_nodes.back()) return 0.0;
    const int n = static_cast<int>(k_nodes.size());
    const int i = std::min(static_cast<int>(a / h), n - 2);
    const double t = a / h - i;
    return (1 - t) * weight[i] + t * weight[i + 1];
}

double Ridge::integral(double a, double b) const {
    const double h = k_nodes[1] - k_nodes[0];
    const int n = static_cast<int>(k_nodes.size());
    // C(x) = ∫_0^x for x ≥ 0, exact for the piecewise-linear interpolant.
    auto C = [&](double x) {
        x = std::min(x, k_nodes.back());
        double acc = 0.0;
        int i = 0;
        for (; i + 1 < n && k_nodes[i + 1] <= x; ++i) acc += 0.5 * h * (weight[i] + weight[i + 1]);
        if (i + 1 < n && x > k_nodes[i]) {
            const double t = (x - k_nodes[i]) / h;
            const double end = weight[i] + t * (weight[i + 1] - weight[i]);
            acc += 0.5 * t * h * (weight[i] + end);
        }
        return acc;
    };
    auto S = [&](double x) { return x >= 0.0 ? C(x) : -C(-x); };
    return S(b) - S(a);
}

double JointDensity::total() const {
    if (ridge) return ridge->integral(-ridge->k_nodes.back(), ridge->k_nodes.back());
    double s = 0.0;
    for (double v : mass) s += v;
    return s;
}

// ---- densities ----

namespace {

Ridge make_ridge(const MomentumKernel& K) {
    Ridge r;
    r.k_nodes = K.k_axis;
    r.weight.resize(K.k_axis.size());
    for (int i = 0; i < K.size(); ++i) r.weight[i] = std::max(0.0, K.at(i, i));
    const double tot = r.integral(-K.kmax(), K.kmax());
    if (!(tot > 0.0)) throw ValidationError("density: kernel diagonal carries no mass");
    for (double& w : r.weight) w /= tot;
    return r;
}

Axis position_axis(const char* label, double x_max, int n) {
    return {Basis::Position, label, "um", -x_max, x_max, n};
}

Axis momentum_axis(const char* label, double k_max, int n) {
    return {Basis::Momentum, label, "hbar/um", -k_max, k_max, n};
}

} // namespace

JointDensity density_pp(const MomentumKernel& K) {
    JointDensity d;
    d.e = momentum_axis("p_e", K.kmax(), 0);
    d.g = momentum_axis("k_gamma", K.kmax(), 0);
    d.ridge = make_ridge(K);
    return d;
}

JointDensity density_mixed(const MomentumKernel& K, MixedKind which, double x_max,
                           const DensityOptions& opt) {
    if (!(x_max > 0.0)) throw ValidationError("density_mixed: x_max must be > 0");
    const Ridge r = make_ridge(K);
    JointDensity d;
    const bool xe = which == MixedKind::XePg;
    d.e = xe ? position_axis("x_e", x_max, opt.n_x) : momentum_axis("p_e", K.kmax(), opt.n_p);
    d.g = xe ? momentum_axis("k_gamma", K.kmax(), opt.n_p) : position_axis("x_gamma", x_max, opt.n_x);
    const Axis& pa = xe ? d.g : d.e;
    std::vector<double> G(pa.n);
    for (int j = 0; j < pa.n; ++j) G[j] = r.integral(pa.lo + j * pa.h(), pa.lo + (j + 1) * pa.h());
    const double ux = 1.0 / opt.n_x;
    d.mass.assign(static_cast<std::size_t>(d.e.n) * d.g.n, 0.0);
    for (int i = 0; i < d.e.n; ++i)
        for (int j = 0; j < d.g.n; ++j)
            d.mass[static_cast<std::size_t>(i) * d.g.n + j] = xe ? ux * G[j] : G[i] * ux;
    return d;
}

namespace {

// Exact ∫ hat_i(a) cos(a s) da on the half-line grid a_i = i h, i = 0..n-1,
// for the even extension (the node at 0 carries only its right half).
void filon_cos_weights(int n, double h, double s, std::vector<double>& c) {
    c.resize(n);
    const double x = h * s;
    double re, im, mid;
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        re = h * (0.5 - x2 / 24.0 + x2 * x2 / 720.0);
        im = h * (x / 6.0 - x * x2 / 120.0 + x * x2 * x2 / 5040.0);
        mid = h * (1.0 - x2 / 12.0 + x2 * x2 / 360.0);
    } else {
        re = h * (1.0 - std::cos(x)) / (x * x);
        im = h * (x - std::sin(x)) / (x * x);
        const double q = std::sin(0.5 * x) / (0.5 * x);
        mid = h * q * q;
    }
    c[0] = re;
    for (int i = 1; i < n - 1; ++i) c[i] = std::cos(i * x) * mid;
    const double aN = (n - 1) * h;
    c[n - 1] = std::cos(aN * s) * re + std::sin(aN * s) * im;
}

// 4π ∫_0^K f̂(a, a) da for the bilinear interpolant.
double bilinear_trace_integral(const MomentumKernel& K) {
    const double h = K.dk();
    double acc = 0.0;
    for (int i = 0; i + 1 < K.size(); ++i)
        acc += h * ((K.at(i, i) + K.at(i + 1, i + 1)) / 3.0 + (K.at(i, i + 1) + K.at(i + 1, i)) / 6.0);
    return 4.0 * kPi * acc;
}

std::vector<double> profile_samples(const MomentumKernel& K, double ds, int count) {
    const int n = K.size();
    std::vector<double> out(count);
    std::vector<double> c, Fc(n);
    for (int q = 0; q < count; ++q) {
        filon_cos_weights(n, K.dk(), q * ds, c);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            const double* fi = &K.f[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) row += fi[j] * c[j];
            acc += c[i] * row;
        }
        out[q] = 4.0 * acc;
    }
    return out;
}

} // namespace

double xx_profile_unnormalised(const MomentumKernel& K, double s) {
    std::vector<double> c;
    filon_cos_weights(K.size(), K.dk(), s, c);
    const int n = K.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += c[i] * K.at(i, j) * c[j];
    return 4.0 * acc;
}

JointDensity density_xx(const MomentumKernel& K, double x_max, const DensityOptions& opt) {
    if (!(x_max > 0.0)) throw ValidationError("density_xx: x_max must be > 0");
    if (opt.check_window) {
        const double sens = xx_window_sensitivity(K, x_max);
        if (sens > 0.01)
            throw ConvergenceError("density_xx: position profile not converged in x_max (relative change " +
                                   std::to_string(sens) + ")");
    }
    const int n = opt.n_x;
    const int ov = std::max(2, opt.profile_oversample + (opt.profile_oversample % 2));
    JointDensity d;
    d.e = position_axis("x_e", x_max, n);
    d.g = position_axis("x_gamma", x_max, n);
    const double h = d.e.h();
    const double ds = h / ov;
    const int count = n * ov + 1;  // s ∈ [0, n h] = [0, 2 x_max]
    const double unit = bilinear_trace_integral(K);
    auto prof = profile_samples(K, ds, count);
    for (double& v : prof) v /= unit;
    d.profile_s.resize(count);
    for (int q = 0; q < count; ++q) d.profile_s[q] = q * ds;
    d.profile = prof;

    // Mass of a cell pair with index offset m: h ∫ Π(s) Λ(s/h − m) ds.
    auto Pi = [&](int q) { return prof[static_cast<std::size_t>(std::abs(q))]; };
    std::vector<double> offset_mass(2 * n - 1);
    const auto w = simpson_weights(2 * ov + 1, 2.0 * h);
    for (int m = -(n - 1); m <= n - 1; ++m) {
        double acc = 0.0;
        for (int t = -ov; t <= ov; ++t) {
            const int q = m * ov + t;
            if (std::abs(q) >= count) continue;
            acc += w[t + ov] * Pi(q) * (1.0 - std::abs(static_cast<double>(t)) / ov);
        }
        offset_mass[m + n - 1] = std::max(0.0, h * acc);
    }
    d.mass.resize(static_cast<std::size_t>(n) * n);
    double tot = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tot += (d.mass[static_cast<std::size_t>(i) * n + j] = offset_mass[i - j + n - 1]);
    for (double& v : d.mass) v /= tot;
    return d;
}

double xx_window_sensitivity(const MomentumKernel& K, double x_max) {
    const double ds = std::min(0.01, x_max / 2000.0);
    const int count = static_cast<int>(std::ceil(3.0 * x_max / ds)) + 1;
    const auto prof = profile_samples(K, ds, count);
    auto q0 = [&](double X) {
        const int m = static_cast<int>(std::floor(2.0 * X / ds));
        std::vector<double> y(m + 1);
        for (int q = 0; q <= m; ++q) y[q] = prof[q] * (2.0 * X - q * ds);
        const double Z = 2.0 * simpson(y, ds);
        return 2.0 * X * prof[0] / Z;
    };
    const double a = q0(x_max), b = q0(1.5 * x_max);
    return std::abs(a - b) / std::abs(b);
}

JointDensity ridge_to_grid(const JointDensity& src, int n_p) {
    if (!src.ridge) return src;
    const Ridge& r = *src.ridge;
    const double K = r.k_nodes.back();
    JointDensity d;
    d.e = momentum_axis(src.e.label.c_str(), K, n_p);
    d.g = momentum_axis(src.g.label.c_str(), K, n_p);
    d.mass.assign(static_cast<std::size_t>(n_p) * n_p, 0.0);
    const double h = d.g.h();
    for (int j = 0; j < n_p; ++j) {
        // p_e = −ħk: electron cell mirrored through the origin.
        d.mass[static_cast<std::size_t>(n_p - 1 - j) * n_p + j] = r.integral(d.g.lo + j * h, d.g.lo + (j + 1) * h);
    }
    return d;
}

// ---- PSF ----

std::vector<double> gaussian_cell_weights(double sigma, double h) {
    if (!(sigma > 0.0)) return {1.0};
    // H(x) = ∫ Φ(x/σ) dx = x Φ(x/σ) + σ φ(x/σ); transfer from a uniform cell to a
    // cell offset by m cells is [H((m+1)h) − 2H(mh) + H((m−1)h)] / h.
    auto H = [&](double x) {
        const double z = x / sigma;
        return x * 0.5 * std::erfc(-z / std::sqrt(2.0)) + sigma * std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
    };
    const int half = static_cast<int>(std::ceil(6.0 * sigma / h));
    std::vector<double> w(2 * half + 1);
    double tot = 0.0;
    for (int m = -half; m <= half; ++m) {
        const double v = (H((m + 1) * h) - 2.0 * H(m * h) + H((m - 1) * h)) / h;
        w[m + half] = std::max(0.0, v);
        tot += w[m + half];
    }
    for (double& v : w) v /= tot;
    return w;
}

namespace {

double axis_sigma(const Axis& a, bool electron, const ResolutionProfile& r) {
    const double fwhm = a.basis == Basis::Position ? (electron ? r.fwhm_x_e : r.fwhm_x_g)
                                                   : (electron ? r.fwhm_p_e : r.fwhm_p_g);
    if (fwhm < 0.0 || !std::isfinite(fwhm)) throw ValidationError("apply_psf: FWHM must be >= 0");
    return fwhm / kFwhmPerSigma;
}

} // namespace

namespace {

// Even profile sampled on s_q = q·ds, q ≥ 0, convolved with N(0, σ²) in s.
std::vector<double> blur_profile(const std::vector<double>& s, const std::vector<double>& p, double sigma) {
    if (sigma == 0.0 || s.size() < 2) return p;
    const double ds = s[1] - s[0];
    const auto w = gaussian_cell_weights(sigma, ds);
    const int half = static_cast<int>(w.size() / 2), n = static_cast<int>(p.size());
    std::vector<double> out(n, 0.0);
    for (int q = 0; q < n; ++q) {
        double acc = 0.0;
        for (int m = -half; m <= half; ++m) {
            const int r = std::abs(q - m);
            if (r < n) acc += w[m + half] * p[r];
        }
        out[q] = acc;
    }
    return out;
}

} // namespace

JointDensity apply_psf(const JointDensity& src, const ResolutionProfile& r, int n_p_for_ridge) {
    const double se = axis_sigma(src.e, true, r), sg = axis_sigma(src.g, false, r);
    if (se == 0.0 && sg == 0.0) return src;
    JointDensity d = src.ridge ? ridge_to_grid(src, n_p_for_ridge) : src;
    if (6.0 * se > d.e.hi - d.e.lo || 6.0 * sg > d.g.hi - d.g.lo)
        throw ValidationError("apply_psf: PSF wider than the density window");
    const int ne = d.e.n, ng = d.g.n;
    std::vector<double> tmp(d.mass.size(), 0.0);

    // Along the photon axis (contiguous rows).
    const auto wg = gaussian_cell_weights(sg, d.g.h());
    const int hg = static_cast<int>(wg.size() / 2);
    for (int i = 0; i < ne; ++i) {
        const double* row = &d.mass[static_cast<std::size_t>(i) * ng];
        double* out = &tmp[static_cast<std::size_t>(i) * ng];
        for (int j = 0; j < ng; ++j) {
            const double v = row[j];
            if (v == 0.0) continue;
            const int lo = std::max(0, j - hg), hi = std::min(ng - 1, j + hg);
            for (int t = lo; t <= hi; ++t) out[t] += v * wg[t - j + hg];
        }
    }
    // Along the electron axis.
    const auto we = gaussian_cell_weights(se, d.e.h());
    const int he = static_cast<int>(we.size() / 2);
    std::fill(d.mass.begin(), d.mass.end(), 0.0);
    for (int i = 0; i < ne; ++i) {
        const double* row = &tmp[static_cast<std::size_t>(i) * ng];
        const int lo = std::max(0, i - he), hi = std::min(ne - 1, i + he);
        for (int t = lo; t <= hi; ++t) {
            const double w = we[t - i + he];
            double* out = &d.mass[static_cast<std::size_t>(t) * ng];
            for (int j = 0; j < ng; ++j) out[j] += w * row[j];
        }
    }
    double tot = 0.0;
    for (double v : d.mass) tot += v;
    for (double& v : d.mass) v /= tot;
    d.margin_e += 6.0 * se + d.e.h();
    d.margin_g += 6.0 * sg + d.g.h();
    if (!d.profile.empty()) d.profile = blur_profile(d.profile_s, d.profile, std::hypot(se, sg));
    return d;
}

// ---- binning a density ----

double JointProbTable::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

namespace {

// Per-cell outcome fractions for one axis, restricted to its evaluation window.
std::vector<double> axis_fractions(const Axis& a, double margin, const PeriodicBinning& b,
                                   const BinningOptions& opt, std::vector<std::string>& warnings) {
    double lo = a.lo, hi = a.hi;
    if (a.basis == Basis::Position && opt.whole_periods) {
        const double ilo = a.lo + margin, ihi = a.hi - margin;
        const double periods = std::floor((ihi - ilo) / b.T);
        if (periods >= 1.0) {
            const double mid = 0.5 * (ilo + ihi), W = periods * b.T;
            lo = mid - 0.5 * W;
            hi = mid + 0.5 * W;
        } else {
            warnings.push_back(a.label + ": window shorter than one period");
        }
    }
    if (b.width() < 8.0 * a.h())
        warnings.push_back(a.label + ": fewer than 8 grid cells per bin width");
    const int d = b.d;
    std::vector<double> w(static_cast<std::size_t>(a.n) * d, 0.0);
    const double h = a.h();
    for (int i = 0; i < a.n; ++i) {
        const double c0 = std::max(lo, a.lo + i * h), c1 = std::min(hi, a.lo + (i + 1) * h);
        if (c1 <= c0) continue;
        for (int n = 0; n < d; ++n) w[static_cast<std::size_t>(i) * d + n] = b.overlap(c0, c1, n) / h;
    }
    return w;
}

JointProbTable ridge_probabilities(const JointDensity& dens, const PeriodicBinning& be,
                                   const PeriodicBinning& bg) {
    const Ridge& r = *dens.ridge;
    const double K = r.k_nodes.back();
    std::vector<double> cuts{-K, K};
    auto add_edges = [&](const PeriodicBinning& b, double sign) {
        const double w = b.width();
        // Edges of b in its own variable v are center + m w; in k they sit at sign·v.
        const double vlo = std::min(sign * -K, sign * K), vhi = std::max(sign * -K, sign * K);
        for (double m = std::ceil((vlo - b.center) / w); b.center + m * w <= vhi; m += 1.0) {
            const double k = sign * (b.center + m * w);
            if (k > -K && k < K) cuts.push_back(k);
        }
    };
    add_edges(bg, 1.0);
    add_edges(be, -1.0);
    std::sort(cuts.begin(), cuts.end());
    JointProbTable t;
    t.d = be.d;
    t.p.assign(static_cast<std::size_t>(t.d) * t.d, 0.0);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], b = cuts[c + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const int ng = bg.outcome(mid), ne = be.outcome(-mid);
        t.p[static_cast<std::size_t>(ne) * t.d + ng] += r.integral(a, b);
    }
    return t;
}

// P(a, b) = (1/T) ∫ Π(s) |{x ∈ one period : x ∈ R_a, x − s ∈ R'_b}| ds, the
// limit of an unbounded window for a density that depends on x_e − x_γ only.
JointProbTable profile_probabilities(const JointDensity& dens, const PeriodicBinning& be,
                                     const PeriodicBinning& bg) {
    const auto& s = dens.profile_s;
    const auto& p = dens.profile;
    const int d = be.d;
    const double we = be.width();
    JointProbTable t;
    t.d = d;
    t.p.assign(static_cast<std::size_t>(d) * d, 0.0);
    const std::size_t n = s.size();
    for (std::size_t q = 0; q < n; ++q) {
        const double wq = (q == 0 || q + 1 == n) ? 0.5 : 1.0;
        for (double sign : {1.0, -1.0}) {
            if (q == 0 && sign < 0.0) continue;
            const PeriodicBinning shifted(bg.T, d, bg.center + sign * s[q]);
            for (int a = 0; a < d; ++a) {
                const double lo = be.center + a * we;
                for (int b = 0; b < d; ++b)
                    t.p[static_cast<std::size_t>(a) * d + b] += wq * p[q] * shifted.overlap(lo, lo + we, b);
            }
        }
    }
    if (n > 1 && be.width() < 8.0 * (s[1] - s[0]))
        t.warnings.push_back("profile: fewer than 8 samples per bin width");
    return t;
}

} // namespace

JointProbTable joint_probabilities(const JointDensity& dens, const PeriodicBinning& be,
                                   const PeriodicBinning& bg, const BinningOptions& opt) {
    if (be.d != bg.d) throw ValidationError("joint_probabilities: binnings have different outcome counts");
    JointProbTable t;
    if (dens.ridge) {
        t = ridge_probabilities(dens, be, bg);
    } else if (opt.use_profile && !dens.profile.empty() && dens.e.basis == Basis::Position &&
               dens.g.basis == Basis::Position && be.T == bg.T) {
        t = profile_probabilities(dens, be, bg);
    } else {
        const int d = be.d;
        t.d = d;
        t.p.assign(static_cast<std::size_t>(d) * d, 0.0);
        const auto we = axis_fractions(dens.e, dens.margin_e, be, opt, t.warnings);
        const auto wg = axis_fractions(dens.g, dens.margin_g, bg, opt, t.warnings);
        const int ne = dens.e.n, ng = dens.g.n;
        std::vector<double> r(d);
        for (int i = 0; i < ne; ++i) {
            bool any = false;
            for (int a = 0; a < d; ++a) any = any || we[static_cast<std::size_t>(i) * d + a] != 0.0;
            if (!any) continue;
            std::fill(r.begin(), r.end(), 0.0);
            const double* row = &dens.mass[static_cast<std::size_t>(i) * ng];
            for (int j = 0; j < ng; ++j) {
                const double v = row[j];
                if (v == 0.0) continue;
                const double* wj = &wg[static_cast<std::size_t>(j) * d];
                for (int b = 0; b < d; ++b) r[b] += v * wj[b];
            }
            for (int a = 0; a < d; ++a) {
                const double wa = we[static_cast<std::size_t>(i) * d + a];
                for (int b = 0; b < d; ++b) t.p[static_cast<std::size_t>(a) * d + b] += wa * r[b];
            }
        }
    }
    t.basis_e = dens.e.basis;
    t.basis_g = dens.g.basis;
    const double s = t.sum();
    if (!(s > 0.0)) throw ValidationError("joint_probabilities: no probability mass inside the window");
    for (double& v : t.p) v /= s;
    return t;
}

// ---- coincidence counts ----

JointProbTable counts_to_probabilities(const std::vector<std::int64_t>& counts, int d) {
    if (d < 2 || counts.size() != static_cast<std::size_t>(d) * d)
        throw ValidationError("counts_to_probabilities: expected a d x d table");
    double N = 0.0;
    for (auto c : counts) {
        if (c < 0) throw ValidationError("counts_to_probabilities: negative count");
        N += static_cast<double>(c);
    }
    if (N <= 0.0) throw ValidationError("counts_to_probabilities: all counts are zero");
    JointProbTable t;
    t.d = d;
    t.p.resize(counts.size());
    t.stderr_.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        t.p[i] = static_cast<double>(counts[i]) / N;
        t.stderr_[i] = std::sqrt(t.p[i] * (1.0 - t.p[i]) / N);
    }
    return t;
}

std::vector<std::int64_t> read_counts_csv(std::istream& is, int& d_out) {
    struct Row {
        long long ne, ng, c;
    };
    std::vector<Row> rows;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw ValidationError("counts csv: expected three columns n_e,n_gamma,count");
        try {
            rows.push_back({std::stoll(a), std::stoll(b), std::stoll(c)});
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw ValidationError("counts csv: non-numeric entry: " + line);
        }
        first = false;
    }
    long long d = 0;
    for (const auto& r : rows) {
        if (r.ne < 0 || r.ng < 0) throw ValidationError("counts csv: negative outcome index");
        d = std::max({d, r.ne + 1, r.ng + 1});
    }
    if (d < 2) throw ValidationError("counts csv: need at least two outcomes");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(d * d), 0);
    for (const auto& r : rows) counts[static_cast<std::size_t>(r.ne * d + r.ng)] += r.c;
    d_out = static_cast<int>(d);
    return counts;
}

} // namespace epr
