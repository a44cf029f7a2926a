#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pgil/image.hpp"

namespace pgil {
namespace detail {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 Cooley-Tukey. n must be a power of two.
inline void fft_pow2(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cd u = a[i + k];
                cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein chirp transform for arbitrary n, built on power-of-two FFTs.
inline void fft_bluestein(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_pow2(2 * n - 1);
    const double sign = inverse ? 1.0 : -1.0;

    std::vector<cd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle argument small
        std::size_t k2 = (k * k) % (2 * n);
        double ang = sign * kTwoPi * static_cast<double>(k2) / (2.0 * static_cast<double>(n));
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }

    std::vector<cd> x(m, cd(0.0)), y(m, cd(0.0));
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

    fft_pow2(x, false);
    fft_pow2(y, false);
    for (std::size_t i = 0; i < m; ++i) x[i] *= y[i];
    fft_pow2(x, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * chirp[k];
}

}  // namespace detail

// Unnormalized forward transform; inverse divides by n.
inline void fft(std::vector<cd>& a, bool inverse = false) {
    if (a.empty()) throw std::invalid_argument("fft: empty input");
    if (a.size() == 1) return;
    if (detail::is_pow2(a.size()))
        detail::fft_pow2(a, inverse);
    else
        detail::fft_bluestein(a, inverse);
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(a.size());
        for (cd& z : a) z *= inv_n;
    }
}

// Row-column 2-D transform of a row-major h x w grid.
inline void fft_2d(std::vector<cd>& data, int h, int w, bool inverse = false) {
    if (data.size() != static_cast<std::size_t>(h) * w)
        throw std::invalid_argument("fft_2d: buffer does not match dims");
    std::vector<cd> line(static_cast<std::size_t>(w));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) line[c] = data[static_cast<std::size_t>(r) * w + c];
        fft(line, inverse);
        for (int c = 0; c < w; ++c) data[static_cast<std::size_t>(r) * w + c] = line[c];
    }
    line.assign(static_cast<std::size_t>(h), cd(0.0));
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) line[r] = data[static_cast<std::size_t>(r) * w + c];
        fft(line, inverse);
        for (int r = 0; r < h; ++r) data[static_cast<std::size_t>(r) * w + c] = line[r];
    }
}

}  // namespace pgil
