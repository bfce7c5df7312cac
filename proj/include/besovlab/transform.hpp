#pragma once
// Littlewood-Paley window pairs on a periodic sampled domain, FFT-based
// analysis into dyadic coefficients and synthesis back. The discretization is
// alias-free: each dyadic filter band is narrower than its coefficient
// sampling lattice, so analyze/synthesize invert each other exactly on
// band-limited signals (up to roundoff).

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "besovlab/rng.hpp"
#include "besovlab/seqspace.hpp"

namespace besovlab {

// Radial frequency profiles. fphi is a smooth bump supported in (lo, hi)
// inside [1/2, 2]; fpsi = fphi / D with D the dilation-periodic square sum,
// which makes the telescoping product sum identically one.
struct WindowPair {
    std::string name;
    double lo = 0.5;
    double hi = 2.0;
    double ass2_lower = 0.0; // min of fphi over [3/5, 5/3], recorded at build
    double ass3_error = 0.0; // max deviation of the telescoping sum from 1

    double fphi(double t) const;
    double fpsi(double t) const;
};

// profiles: "bump" (support (0.5, 2)) and "bump_narrow" (support (0.55, 1.9))
WindowPair build_windows(const std::string& profile = "bump");

struct PeriodicSignal {
    int n = 1;          // dimension, 1 or 2
    std::int64_t N = 0; // samples per axis, a power of two
    std::vector<std::complex<double>> values; // row-major, N^n entries
    bool band_limited = false; // spectrum confined to fully resolved modes

    int levels() const; // J = log2 N
    static PeriodicSignal zeros(int n, std::int64_t N);
};

// dyadic levels an N-sample grid can carry: [1, J-2]
std::pair<int, int> resolvable_levels(const PeriodicSignal& f);

// modes whose complete dyadic cover lies inside the resolvable range satisfy
// 1 <= |nu| <= 2^{J-5}; such signals reproduce exactly under the transform
bool check_band_limited(const PeriodicSignal& f, double rel_tol = 1e-12);

// unnormalized in-place radix-2 transforms (sign -1 forward, +1 inverse)
void fft_1d(std::vector<std::complex<double>>& a, bool inverse);
void fft_nd(std::vector<std::complex<double>>& a, int n, std::int64_t N, bool inverse);

// forward spectrum with the 1/N^n factor; synthesis applies none
std::vector<std::complex<double>> spectrum_of(const PeriodicSignal& f);
PeriodicSignal signal_from_spectrum(int n, std::int64_t N,
                                    const std::vector<std::complex<double>>& hat);

// random spectrum on the fully resolved band, never identically zero
std::vector<std::complex<double>> random_band_spectrum(Rng& rng, int n, std::int64_t N, int modes);
PeriodicSignal random_band_signal(Rng& rng, int n, std::int64_t N, int modes);

// lambda_{k,m} = 2^{-kn/2} (f filtered by fphi at level k)(m / 2^k);
// the coefficient window covers the unit box with levels [k_lo, k_hi]
CoeffField analyze(const PeriodicSignal& f, const WindowPair& wp, int k_lo, int k_hi,
                   int res = 2);
CoeffField analyze(const PeriodicSignal& f, const WindowPair& wp);

// sum of lambda_{k,m} psi_{k,m}; N = 0 picks the smallest grid carrying the
// window's top level
PeriodicSignal synthesize(const CoeffField& lambda, const WindowPair& wp, std::int64_t N = 0);

// ratio of the sequence-space norms of the two analyses of f
double window_independence_ratio(const PeriodicSignal& f, const WindowPair& wpA,
                                 const WindowPair& wpB, const SpaceSpec& spec);

// JSON header line {n, N, band}, then little-endian float32 (re, im) pairs
std::string signal_to_bytes(const PeriodicSignal& f);
PeriodicSignal signal_from_bytes(const std::string& bytes);

} // namespace besovlab
