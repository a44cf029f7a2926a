#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgil/fft.hpp"
#include "pgil/image.hpp"

namespace pgil {

enum class FilterWindow { rectangular, raised_cosine };

inline FilterWindow filter_window_from_string(const std::string& s) {
    if (s == "rectangular") return FilterWindow::rectangular;
    if (s == "raised-cosine") return FilterWindow::raised_cosine;
    throw std::invalid_argument("unknown filter window kind: " + s);
}

// Normalized-frequency difference wrapped to [-0.5, 0.5).
inline double wrap_frequency(double f) {
    double w = f - std::round(f);
    if (w >= 0.5) w -= 1.0;
    if (w < -0.5) w += 1.0;
    return w;
}

// Grid of separable bandpass filters over the normalized spectrum, centered on
// frequency pairs {(f_r, f_a)}.
struct FilterBank {
    int n_r = 0;
    int n_a = 0;
    double bandwidth = 0;
    FilterWindow window = FilterWindow::rectangular;
    std::vector<double> centers_r;
    std::vector<double> centers_a;

    int size() const { return n_r * n_a; }

    // Separable 1-D passband weight; passbands are half-open [c-b/2, c+b/2)
    // on the frequency circle so a disjoint bank tiles bins exactly once. The
    // window is shifted by a tiny epsilon on both edges, which keeps the
    // partition exact while making membership of bins that land on an edge
    // robust to rounding (the Nyquist bin of an even-length segment does).
    double axis_weight(double f, double center) const {
        double d = wrap_frequency(f - center);
        double half = bandwidth / 2.0;
        constexpr double eps = 1e-9;
        if (d < -half - eps || d >= half - eps) return 0.0;
        if (window == FilterWindow::rectangular) return 1.0;
        return 0.5 * (1.0 + std::cos(6.283185307179586 * std::min(std::abs(d), half) / bandwidth));
    }

    double weight(double f_r, double f_a, int ir, int ia) const {
        double wr = axis_weight(f_r, centers_r[ir]);
        if (wr == 0.0) return 0.0;
        return wr * axis_weight(f_a, centers_a[ia]);
    }
};

// Centers are uniformly spaced with pitch 1/n per axis, symmetric about zero.
inline FilterBank build_filter_bank(int n_r, int n_a, double bandwidth,
                                    FilterWindow window = FilterWindow::rectangular) {
    if (n_r < 1 || n_a < 1) throw std::invalid_argument("build_filter_bank: grid must be >= 1x1");
    if (bandwidth <= 0.0 || bandwidth > 1.0)
        throw std::invalid_argument("build_filter_bank: passband exceeds Nyquist band");
    int n_max = std::max(n_r, n_a);
    if (bandwidth > 2.0 / static_cast<double>(n_max) && n_max > 1)
        throw std::invalid_argument("build_filter_bank: filters overlap beyond 100%");

    FilterBank bank;
    bank.n_r = n_r;
    bank.n_a = n_a;
    bank.bandwidth = bandwidth;
    bank.window = window;
    bank.centers_r.resize(n_r);
    bank.centers_a.resize(n_a);
    for (int i = 0; i < n_r; ++i)
        bank.centers_r[i] = (i - (n_r - 1) / 2.0) / static_cast<double>(n_r);
    for (int i = 0; i < n_a; ++i)
        bank.centers_a[i] = (i - (n_a - 1) / 2.0) / static_cast<double>(n_a);
    return bank;
}

struct SubbandPattern {
    std::vector<double> values;  // row-major over (i_r, i_a)
    bool clamped = false;        // segment was zero-padded at an image border
};

// Sub-band scattering pattern of the target at (row, col): bandpass-filter the
// segment spectrum on every (f_r, f_a) center and take the magnitude of the
// filtered signal back at the segment center.
inline SubbandPattern subband_pattern(const ComplexImage& image, int row, int col,
                                      int segment_size, const FilterBank& bank) {
    if (segment_size < 1) throw std::invalid_argument("subband_pattern: segment_size < 1");
    if (row < 0 || row >= image.height || col < 0 || col >= image.width)
        throw std::invalid_argument("subband_pattern: target outside image");

    const int n = segment_size;
    const int r0 = row - n / 2;
    const int c0 = col - n / 2;

    SubbandPattern out;
    std::vector<cd> seg(static_cast<std::size_t>(n) * n, cd(0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int r = r0 + i, c = c0 + j;
            if (r < 0 || r >= image.height || c < 0 || c >= image.width) {
                out.clamped = true;
                continue;
            }
            seg[static_cast<std::size_t>(i) * n + j] = image.at(r, c);
        }
    }

    fft_2d(seg, n, n, false);

    // Inverse transform evaluated only at the segment center (n/2, n/2).
    const int cr = n / 2, cc = n / 2;
    std::vector<cd> acc(static_cast<std::size_t>(bank.size()), cd(0.0));
    const double inv_nn = 1.0 / (static_cast<double>(n) * n);
    for (int k = 0; k < n; ++k) {
        double f_r = wrap_frequency(static_cast<double>(k) / n);
        for (int l = 0; l < n; ++l) {
            double f_a = wrap_frequency(static_cast<double>(l) / n);
            double ang = 6.283185307179586 *
                         (static_cast<double>(k) * cr / n + static_cast<double>(l) * cc / n);
            cd z = seg[static_cast<std::size_t>(k) * n + l] * cd(std::cos(ang), std::sin(ang));
            for (int ir = 0; ir < bank.n_r; ++ir) {
                double wr = bank.axis_weight(f_r, bank.centers_r[ir]);
                if (wr == 0.0) continue;
                for (int ia = 0; ia < bank.n_a; ++ia) {
                    double wa = bank.axis_weight(f_a, bank.centers_a[ia]);
                    if (wa == 0.0) continue;
                    acc[static_cast<std::size_t>(ir) * bank.n_a + ia] += z * (wr * wa);
                }
            }
        }
    }

    out.values.resize(static_cast<std::size_t>(bank.size()));
    for (int i = 0; i < bank.size(); ++i) out.values[i] = std::abs(acc[i] * inv_nn);
    return out;
}

}  // namespace pgil
