#include "besovlab/transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace besovlab {
namespace {

// Integer lattice mode nu maps to profile argument 4|nu| / 2^k. With this
// scale the level-k support {|nu| in (2^{k-3}, 2^{k-1})} has diameter below
// the coefficient lattice period 2^k, so subsampling at stride N/2^k loses
// nothing, and level k fits under Nyquist exactly when k <= J-2.
constexpr double kLatticeScale = 4.0;

bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::int64_t v) {
    int j = 0;
    while ((std::int64_t(1) << j) < v) ++j;
    return j;
}

std::int64_t wrap_freq(std::int64_t s, std::int64_t N) { return s < N / 2 ? s : s - N; }

double radial_mode(std::int64_t flat, int n, std::int64_t N) {
    if (n == 1) return std::abs(double(wrap_freq(flat, N)));
    const double a = double(wrap_freq(flat / N, N));
    const double b = double(wrap_freq(flat % N, N));
    return std::hypot(a, b);
}

// every level whose closed support band [1/2, 2] can touch the mode must lie
// inside [1, J-2]; that pins |nu| to [1, 2^{J-5}]
bool mode_fully_resolved(double absnu, int J) {
    return absnu >= 1.0 && absnu <= std::exp2(double(J - 5));
}

void require_signal(const PeriodicSignal& f) {
    if (f.n != 1 && f.n != 2) throw std::invalid_argument("signal dimension must be 1 or 2");
    if (!is_pow2(f.N)) throw std::invalid_argument("signal size per axis must be a power of two");
    const std::int64_t total = f.n == 1 ? f.N : f.N * f.N;
    if (std::int64_t(f.values.size()) != total)
        throw std::invalid_argument("signal sample count does not match N^n");
}

} // namespace

double WindowPair::fphi(double t) const {
    const double a = (t - lo) * (hi - t);
    if (a <= 0.0) return 0.0;
    return std::exp(-1.0 / a);
}

// D(t) = sum_j fphi(2^{-j} t)^2 over the whole dilation ladder; it is
// invariant under t -> 2t, which is what collapses the telescoping sum to 1
static double ladder_square_sum(const WindowPair& wp, double t) {
    const int jlo = int(std::floor(std::log2(t / wp.hi)));
    const int jhi = int(std::ceil(std::log2(t / wp.lo)));
    double d = 0.0;
    for (int j = jlo; j <= jhi; ++j) {
        const double v = wp.fphi(std::ldexp(t, -j));
        d += v * v;
    }
    return d;
}

double WindowPair::fpsi(double t) const {
    const double v = fphi(t);
    if (v == 0.0) return 0.0;
    return v / ladder_square_sum(*this, t);
}

WindowPair build_windows(const std::string& profile) {
    WindowPair wp;
    wp.name = profile;
    if (profile == "bump") {
        wp.lo = 0.5;
        wp.hi = 2.0;
    } else if (profile == "bump_narrow") {
        wp.lo = 0.55;
        wp.hi = 1.9;
    } else {
        throw std::invalid_argument("unknown window profile: " + profile);
    }

    // support containment in [1/2, 2]
    if (wp.lo < 0.5 || wp.hi > 2.0 || wp.lo >= wp.hi)
        throw std::logic_error("window profile support leaves [1/2, 2]");

    // positivity on the overlap band [3/5, 5/3]
    const int probes = 4001;
    double c = std::numeric_limits<double>::infinity();
    for (int i = 0; i < probes; ++i) {
        const double t = 0.6 + (5.0 / 3.0 - 0.6) * double(i) / double(probes - 1);
        c = std::min(c, wp.fphi(t));
    }
    if (!(c > 0.0)) throw std::logic_error("window profile vanishes on the overlap band");
    wp.ass2_lower = c;

    // the normalizing denominator must stay away from zero over one period
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < probes; ++i) {
        const double t = 1.0 + double(i) / double(probes);
        dmin = std::min(dmin, ladder_square_sum(wp, t));
    }
    if (!(dmin > 0.0))
        throw std::logic_error("window normalization denominator vanishes on the band");

    // telescoping partition of unity, checked over one dilation period
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        const double t = 1.0 + double(i) / double(probes);
        double s = 0.0;
        for (int j = -3; j <= 3; ++j) {
            const double u = std::ldexp(t, -j);
            s += wp.fphi(u) * wp.fpsi(u);
        }
        worst = std::max(worst, std::abs(s - 1.0));
    }
    wp.ass3_error = worst;
    if (!(worst <= 1e-10))
        throw std::logic_error("window pair fails the reproducing sum check");
    return wp;
}

int PeriodicSignal::levels() const { return log2_exact(N); }

PeriodicSignal PeriodicSignal::zeros(int n, std::int64_t N) {
    if (n != 1 && n != 2) throw std::invalid_argument("signal dimension must be 1 or 2");
    if (!is_pow2(N)) throw std::invalid_argument("signal size per axis must be a power of two");
    PeriodicSignal f;
    f.n = n;
    f.N = N;
    f.values.assign(std::size_t(n == 1 ? N : N * N), {0.0, 0.0});
    return f;
}

std::pair<int, int> resolvable_levels(const PeriodicSignal& f) {
    require_signal(f);
    return {1, f.levels() - 2};
}

bool check_band_limited(const PeriodicSignal& f, double rel_tol) {
    require_signal(f);
    const auto hat = spectrum_of(f);
    double top = 0.0;
    for (const auto& v : hat) top = std::max(top, std::abs(v));
    if (top == 0.0) return true;
    const int J = f.levels();
    for (std::size_t s = 0; s < hat.size(); ++s) {
        if (std::abs(hat[s]) <= rel_tol * top) continue;
        if (!mode_fully_resolved(radial_mode(std::int64_t(s), f.n, f.N), J)) return false;
    }
    return true;
}

void fft_1d(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(std::int64_t(n))) throw std::invalid_argument("fft length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / double(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto w = std::polar(1.0, ang * double(j));
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

void fft_nd(std::vector<std::complex<double>>& a, int n, std::int64_t N, bool inverse) {
    if (n == 1) {
        if (std::int64_t(a.size()) != N) throw std::invalid_argument("fft buffer size mismatch");
        fft_1d(a, inverse);
        return;
    }
    if (n != 2 || std::int64_t(a.size()) != N * N)
        throw std::invalid_argument("fft buffer size mismatch");
    std::vector<std::complex<double>> tmp(static_cast<std::size_t>(N));
    for (std::int64_t r = 0; r < N; ++r) {
        tmp.assign(a.begin() + r * N, a.begin() + (r + 1) * N);
        fft_1d(tmp, inverse);
        std::copy(tmp.begin(), tmp.end(), a.begin() + r * N);
    }
    for (std::int64_t col = 0; col < N; ++col) {
        for (std::int64_t r = 0; r < N; ++r) tmp[std::size_t(r)] = a[r * N + col];
        fft_1d(tmp, inverse);
        for (std::int64_t r = 0; r < N; ++r) a[r * N + col] = tmp[std::size_t(r)];
    }
}

std::vector<std::complex<double>> spectrum_of(const PeriodicSignal& f) {
    require_signal(f);
    auto hat = f.values;
    fft_nd(hat, f.n, f.N, false);
    const double scale = 1.0 / double(f.values.size());
    for (auto& v : hat) v *= scale;
    return hat;
}

std::vector<std::complex<double>> random_band_spectrum(Rng& rng, int n, std::int64_t N, int modes) {
    const PeriodicSignal z = PeriodicSignal::zeros(n, N);
    const int J = z.levels();
    if (J < 5) throw std::invalid_argument("grid too coarse to carry a fully resolved band");
    const std::int64_t top = std::int64_t(1) << (J - 5);
    std::vector<std::complex<double>> hat(z.values.size(), {0.0, 0.0});
    for (int i = 0; i < modes; ++i) {
        const std::int64_t nu0 = rng.uniform_int(-top, top);
        const std::int64_t nu1 = n == 2 ? rng.uniform_int(-top, top) : 0;
        const double r = std::hypot(double(nu0), double(nu1));
        if (r < 1.0 || r > double(top)) continue;
        const std::size_t s0 = std::size_t(nu0 >= 0 ? nu0 : nu0 + N);
        const std::size_t s1 = std::size_t(nu1 >= 0 ? nu1 : nu1 + N);
        hat[n == 1 ? s0 : s0 * std::size_t(N) + s1] = {rng.normal(), rng.normal()};
    }
    hat[n == 1 ? 1 : std::size_t(N)] = {1.0, 0.25}; // keep the signal nonzero
    return hat;
}

PeriodicSignal random_band_signal(Rng& rng, int n, std::int64_t N, int modes) {
    return signal_from_spectrum(n, N, random_band_spectrum(rng, n, N, modes));
}

PeriodicSignal signal_from_spectrum(int n, std::int64_t N,
                                    const std::vector<std::complex<double>>& hat) {
    PeriodicSignal f = PeriodicSignal::zeros(n, N);
    if (hat.size() != f.values.size()) throw std::invalid_argument("spectrum size mismatch");
    const int J = f.levels();
    bool band = true;
    for (std::size_t s = 0; s < hat.size(); ++s) {
        if (hat[s] == std::complex<double>{0.0, 0.0}) continue;
        if (!mode_fully_resolved(radial_mode(std::int64_t(s), n, N), J)) {
            band = false;
            break;
        }
    }
    f.values = hat;
    fft_nd(f.values, n, N, true);
    f.band_limited = band;
    return f;
}

CoeffField analyze(const PeriodicSignal& f, const WindowPair& wp, int k_lo, int k_hi, int res) {
    require_signal(f);
    const int J = f.levels();
    if (k_lo < 1 || k_hi > J - 2 || k_lo > k_hi)
        throw std::invalid_argument("analysis levels must lie in [1, log2(N) - 2]");

    IndexWindow w;
    w.dim = f.n;
    w.box_lo = 0;
    w.box_hi = 1;
    w.level_min = k_lo;
    w.level_max = k_hi;
    w.res = res;
    CoeffField c(w);

    const auto hat = spectrum_of(f);
    std::vector<std::complex<double>> g;
    for (int k = k_lo; k <= k_hi; ++k) {
        g.assign(hat.size(), {0.0, 0.0});
        bool any = false;
        for (std::size_t s = 0; s < hat.size(); ++s) {
            if (hat[s] == std::complex<double>{0.0, 0.0}) continue;
            const double t = kLatticeScale * radial_mode(std::int64_t(s), f.n, f.N) / std::exp2(double(k));
            const double fl = wp.fphi(t);
            if (fl == 0.0) continue;
            g[s] = hat[s] * fl; // profile is real, conjugation is a no-op
            any = true;
        }
        if (!any) continue;
        fft_nd(g, f.n, f.N, true);
        const std::int64_t stride = f.N >> k;
        const std::int64_t M = std::int64_t(1) << k;
        const double scale = std::exp2(-0.5 * double(k) * double(f.n));
        if (f.n == 1) {
            for (std::int64_t m = 0; m < M; ++m) {
                const auto v = g[std::size_t(m * stride)] * scale;
                if (v != std::complex<double>{0.0, 0.0}) c.set(k, IVec{m, 0, 0}, v);
            }
        } else {
            for (std::int64_t m0 = 0; m0 < M; ++m0)
                for (std::int64_t m1 = 0; m1 < M; ++m1) {
                    const auto v = g[std::size_t(m0 * stride * f.N + m1 * stride)] * scale;
                    if (v != std::complex<double>{0.0, 0.0}) c.set(k, IVec{m0, m1, 0}, v);
                }
        }
    }
    return c;
}

CoeffField analyze(const PeriodicSignal& f, const WindowPair& wp) {
    const auto [klo, khi] = resolvable_levels(f);
    return analyze(f, wp, klo, khi);
}

PeriodicSignal synthesize(const CoeffField& lambda, const WindowPair& wp, std::int64_t N) {
    const IndexWindow& w = lambda.window;
    if (w.dim != 1 && w.dim != 2) throw std::invalid_argument("synthesis dimension must be 1 or 2");
    if (w.box_lo != 0 || w.box_hi != 1)
        throw std::invalid_argument("synthesis expects coefficients on the unit torus box");
    if (w.level_min < 1) throw std::invalid_argument("synthesis levels must start at 1 or above");
    if (N == 0) N = std::int64_t(1) << (w.level_max + 2);
    if (!is_pow2(N)) throw std::invalid_argument("signal size per axis must be a power of two");
    const int J = log2_exact(N);
    if (w.level_max > J - 2)
        throw std::invalid_argument("grid too coarse for the coefficient window's top level");

    const std::size_t total = std::size_t(w.dim == 1 ? N : N * N);
    std::vector<std::complex<double>> out_hat(total, {0.0, 0.0});
    std::vector<std::complex<double>> lam;
    for (int k = w.level_min; k <= w.level_max; ++k) {
        const std::int64_t M = std::int64_t(1) << k;
        lam.assign(std::size_t(w.dim == 1 ? M : M * M), {0.0, 0.0});
        bool any = false;
        CubeKey lo_key{k, IVec{}};
        lo_key.m.fill(std::numeric_limits<std::int64_t>::min());
        for (auto it = lambda.entries.lower_bound(lo_key);
             it != lambda.entries.end() && it->first.k == k; ++it) {
            const IVec& m = it->first.m;
            lam[std::size_t(w.dim == 1 ? m[0] : m[0] * M + m[1])] = it->second;
            any = true;
        }
        if (!any) continue;
        fft_nd(lam, w.dim, M, false); // unnormalized lattice transform of the level
        const double scale = std::exp2(-0.5 * double(k) * double(w.dim));
        for (std::size_t s = 0; s < total; ++s) {
            const double t = kLatticeScale * radial_mode(std::int64_t(s), w.dim, N) / std::exp2(double(k));
            const double fp = wp.fpsi(t);
            if (fp == 0.0) continue;
            const std::size_t fold =
                w.dim == 1 ? std::size_t(std::int64_t(s) % M)
                           : std::size_t((std::int64_t(s) / N % M) * M + std::int64_t(s) % N % M);
            out_hat[s] += scale * fp * lam[fold];
        }
    }
    return signal_from_spectrum(w.dim, N, out_hat);
}

double window_independence_ratio(const PeriodicSignal& f, const WindowPair& wpA,
                                 const WindowPair& wpB, const SpaceSpec& spec) {
    spec.validate();
    const CoeffField ca = analyze(f, wpA);
    const CoeffField cb = analyze(f, wpB);
    const auto norm_of = [&spec](const CoeffField& c) {
        switch (spec.family) {
            case SpaceFamily::b: return bnorm(c, spec);
            case SpaceFamily::f: return fnorm(c, spec);
            case SpaceFamily::f_infinity: return finf_norm(c, spec);
        }
        throw std::logic_error("unreachable space family");
    };
    const double den = norm_of(cb);
    if (!(den > 0.0))
        throw std::domain_error("window independence ratio: denominator norm is zero");
    return norm_of(ca) / den;
}

std::string signal_to_bytes(const PeriodicSignal& f) {
    static_assert(std::endian::native == std::endian::little,
                  "signal serialization assumes a little-endian host");
    require_signal(f);
    nlohmann::json h;
    h["n"] = f.n;
    h["N"] = f.N;
    h["band"] = f.band_limited;
    std::string out = h.dump();
    out.push_back('\n');
    out.reserve(out.size() + f.values.size() * 8);
    for (const auto& v : f.values) {
        const float re = float(v.real());
        const float im = float(v.imag());
        char buf[8];
        std::memcpy(buf, &re, 4);
        std::memcpy(buf + 4, &im, 4);
        out.append(buf, 8);
    }
    return out;
}

PeriodicSignal signal_from_bytes(const std::string& bytes) {
    static_assert(std::endian::native == std::endian::little,
                  "signal serialization assumes a little-endian host");
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw std::invalid_argument("signal blob: missing header line");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::parse_error&) {
        throw std::invalid_argument("signal blob: malformed JSON header");
    }
    if (!h.contains("n") || !h.contains("N") || !h.contains("band"))
        throw std::invalid_argument("signal blob: header must carry n, N, band");
    PeriodicSignal f = PeriodicSignal::zeros(h.at("n").get<int>(), h.at("N").get<std::int64_t>());
    f.band_limited = h.at("band").get<bool>();
    const std::size_t need = f.values.size() * 8;
    if (bytes.size() - nl - 1 != need)
        throw std::invalid_argument("signal blob: payload size does not match N^n");
    const char* p = bytes.data() + nl + 1;
    for (auto& v : f.values) {
        float re = 0, im = 0;
        std::memcpy(&re, p, 4);
        std::memcpy(&im, p + 4, 4);
        v = {double(re), double(im)};
        p += 8;
    }
    return f;
}

} // namespace besovlab
