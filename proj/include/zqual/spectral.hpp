#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "zqual/dataset.hpp"
#include "zqual/error.hpp"
#include "zqual/metrics.hpp"

namespace zqual {

using Complex = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 transform; sign -1 forward, +1 inverse (unscaled).
inline void fft_radix2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        // Twiddles from direct evaluation rather than repeated multiplication.
        std::vector<Complex> tw(half);
        for (std::size_t k = 0; k < half; ++k) tw[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * tw[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

/// Arbitrary-length forward DFT through Bluestein's chirp-z convolution.
inline std::vector<Complex> fft_bluestein(const std::vector<Complex>& x) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    std::vector<Complex> chirp(n);
    const std::size_t two_n = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small.
        const auto k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % two_n);
        chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }
    std::vector<Complex> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    fft_radix2(a, -1);
    fft_radix2(b, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_radix2(a, +1);
    std::vector<Complex> out(n);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * chirp[k];
    return out;
}

}  // namespace detail

/// Unnormalized forward DFT X(k) = sum_n x(n) e^{-2 pi i k n / N} for any N >= 1.
inline std::vector<Complex> fft(std::span<const double> series) {
    if (series.empty()) throw DataError("DFT of an empty series");
    std::vector<Complex> a(series.begin(), series.end());
    if (a.size() == 1) return a;
    if (detail::is_pow2(a.size())) {
        detail::fft_radix2(a, -1);
        return a;
    }
    return detail::fft_bluestein(a);
}

struct Spectrum {
    std::vector<double> amplitudes;
    std::vector<double> phases;
};

inline Spectrum dft(std::span<const double> series) {
    auto X = fft(series);
    Spectrum s;
    s.amplitudes.reserve(X.size());
    s.phases.reserve(X.size());
    for (const auto& c : X) {
        s.amplitudes.push_back(std::abs(c));
        s.phases.push_back(std::arg(c));
    }
    return s;
}

/// Power per frequency bin, |X(k)|^2 / N. Sums to the series energy.
inline std::vector<double> psd(std::span<const double> series) {
    auto X = fft(series);
    const auto n = static_cast<double>(series.size());
    std::vector<double> p(X.size());
    for (std::size_t k = 0; k < X.size(); ++k) p[k] = std::norm(X[k]) / n;
    return p;
}

/// Single-level orthonormal Haar decomposition.
struct WaveletDecomposition {
    std::vector<double> approx;
    std::vector<double> detail;
};

inline WaveletDecomposition haar_dwt(std::span<const double> series) {
    if (series.size() % 2 != 0) throw DataError("Haar transform needs an even length, got " + std::to_string(series.size()));
    const double s = std::numbers::sqrt2 / 2;
    WaveletDecomposition w;
    const std::size_t h = series.size() / 2;
    w.approx.resize(h);
    w.detail.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
        w.approx[i] = (series[2 * i] + series[2 * i + 1]) * s;
        w.detail[i] = (series[2 * i] - series[2 * i + 1]) * s;
    }
    return w;
}

inline std::vector<double> haar_idwt(const WaveletDecomposition& w) {
    if (w.approx.size() != w.detail.size()) throw DataError("Haar inverse: coefficient halves differ in length");
    const double s = std::numbers::sqrt2 / 2;
    std::vector<double> out(2 * w.approx.size());
    for (std::size_t i = 0; i < w.approx.size(); ++i) {
        out[2 * i] = (w.approx[i] + w.detail[i]) * s;
        out[2 * i + 1] = (w.approx[i] - w.detail[i]) * s;
    }
    return out;
}

/// Per-bin |A_orig - A_recon| / A_orig over bins whose original amplitude clears the threshold.
struct SpectrumDiff {
    std::vector<std::size_t> bins;
    std::vector<double> differences;
    std::vector<std::size_t> excluded_bins;
};

inline SpectrumDiff compare_spectra(std::span<const double> orig, std::span<const double> recon,
                                    double threshold = 1e-12) {
    if (orig.size() != recon.size())
        throw DataError("shape mismatch: " + std::to_string(orig.size()) + " vs " + std::to_string(recon.size()));
    const auto a = dft(orig).amplitudes;
    const auto b = dft(recon).amplitudes;
    const double peak = *std::max_element(a.begin(), a.end());
    const double cutoff = threshold * peak;
    SpectrumDiff d;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > 0 && a[k] >= cutoff) {
            d.bins.push_back(k);
            d.differences.push_back(std::abs(a[k] - b[k]) / a[k]);
        } else {
            d.excluded_bins.push_back(k);
        }
    }
    return d;
}

inline SpectrumDiff compare_spectra(const Dataset& orig, const Dataset& recon, double threshold = 1e-12) {
    orig.require_finite("spectrum comparison");
    recon.require_finite("spectrum comparison");
    if (orig.dims() != recon.dims()) throw DataError("shape mismatch between original and reconstruction");
    return compare_spectra(orig.values(), recon.values(), threshold);
}

/// Distortion in Haar coefficient space over the concatenation approx || detail.
inline DistortionStats compare_wavelets(std::span<const double> orig, std::span<const double> recon) {
    if (orig.size() != recon.size())
        throw DataError("shape mismatch: " + std::to_string(orig.size()) + " vs " + std::to_string(recon.size()));
    auto flat = [](const WaveletDecomposition& w) {
        std::vector<double> v(w.approx);
        v.insert(v.end(), w.detail.begin(), w.detail.end());
        return v;
    };
    const auto a = flat(haar_dwt(orig));
    const auto b = flat(haar_dwt(recon));
    return distortion_stats(a, b);
}

inline DistortionStats compare_wavelets(const Dataset& orig, const Dataset& recon) {
    orig.require_finite("wavelet comparison");
    recon.require_finite("wavelet comparison");
    if (orig.dims() != recon.dims()) throw DataError("shape mismatch between original and reconstruction");
    return compare_wavelets(orig.values(), recon.values());
}

}  // namespace zqual
