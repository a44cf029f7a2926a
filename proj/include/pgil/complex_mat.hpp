#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "pgil/image.hpp"

namespace pgil {

// Dense complex matrix of dimension 1..3, value type. Used for scattering
// vectors' coherency/covariance algebra; Hermitian-ness is by convention of
// the producing operation, not enforced on every write.
struct CMat {
    int dim = 3;
    std::array<cd, 9> m{};

    CMat() = default;
    explicit CMat(int d) : dim(d) {}

    cd& at(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
    const cd& at(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

    static CMat zero(int d) { return CMat(d); }

    static CMat identity(int d) {
        CMat out(d);
        for (int i = 0; i < d; ++i) out.at(i, i) = 1.0;
        return out;
    }

    static CMat diag(std::initializer_list<double> v) {
        CMat out(static_cast<int>(v.size()));
        int i = 0;
        for (double x : v) out.at(i, i) = x, ++i;
        return out;
    }

    double trace_real() const {
        double t = 0;
        for (int i = 0; i < dim; ++i) t += at(i, i).real();
        return t;
    }

    CMat& operator+=(const CMat& o) {
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) at(r, c) += o.at(r, c);
        return *this;
    }

    CMat& operator*=(double s) {
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) at(r, c) *= s;
        return *this;
    }

    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator*(CMat a, double s) { return a *= s; }
    friend CMat operator*(double s, CMat a) { return a *= s; }

    double max_hermitian_defect() const {
        double d = 0;
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                d = std::max(d, std::abs(at(r, c) - std::conj(at(c, r))));
        return d;
    }

    double frobenius() const {
        double s = 0;
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) s += std::norm(at(r, c));
        return std::sqrt(s);
    }
};

using CVec = std::array<cd, 3>;

// k k^H
inline CMat outer(const CVec& k, int dim) {
    CMat out(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) out.at(r, c) = k[r] * std::conj(k[c]);
    return out;
}

struct EigenSystem {
    int dim = 3;
    std::array<double, 3> values{};   // sorted descending
    std::array<CVec, 3> vectors{};    // vectors[i] pairs with values[i]
};

// Cyclic Jacobi for Hermitian matrices of dim <= 3. Off-diagonal entries are
// annihilated with phased rotations until below tol * max|diag|.
inline EigenSystem eigen_hermitian(const CMat& h, double tol = 1e-12) {
    const int n = h.dim;
    CMat a = h;
    CMat v = CMat::identity(n);

    // symmetrize once so rounding in the caller cannot bias the sweeps
    for (int r = 0; r < n; ++r) {
        for (int c = r + 1; c < n; ++c) {
            cd avg = 0.5 * (a.at(r, c) + std::conj(a.at(c, r)));
            a.at(r, c) = avg;
            a.at(c, r) = std::conj(avg);
        }
        a.at(r, r) = a.at(r, r).real();
    }

    double scale = 0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.at(i, i).real()));
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c) scale = std::max(scale, std::abs(a.at(r, c)));
    if (scale == 0.0) scale = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c) off = std::max(off, std::abs(a.at(r, c)));
        if (off <= tol * scale) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cd beta = a.at(p, q);
                double ab = std::abs(beta);
                if (ab <= tol * scale * 1e-4) continue;
                cd w = beta / ab;  // phase of the pivot

                double app = a.at(p, p).real();
                double aqq = a.at(q, q).real();
                double tau = (aqq - app) / (2.0 * ab);
                double t = ((tau >= 0) ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                // unitary G: columns (p,q); G[p][p]=c, G[p][q]=s, G[q][p]=-s*conj(w), G[q][q]=c*conj(w)
                cd gpp = c, gpq = s, gqp = -s * std::conj(w), gqq = c * std::conj(w);

                // A <- G^H A G, applied as column then row updates
                for (int r = 0; r < n; ++r) {
                    cd arp = a.at(r, p), arq = a.at(r, q);
                    a.at(r, p) = arp * gpp + arq * gqp;
                    a.at(r, q) = arp * gpq + arq * gqq;
                }
                for (int cidx = 0; cidx < n; ++cidx) {
                    cd apc = a.at(p, cidx), aqc = a.at(q, cidx);
                    a.at(p, cidx) = std::conj(gpp) * apc + std::conj(gqp) * aqc;
                    a.at(q, cidx) = std::conj(gpq) * apc + std::conj(gqq) * aqc;
                }
                a.at(p, q) = 0.0;
                a.at(q, p) = 0.0;
                a.at(p, p) = a.at(p, p).real();
                a.at(q, q) = a.at(q, q).real();

                for (int r = 0; r < n; ++r) {
                    cd vrp = v.at(r, p), vrq = v.at(r, q);
                    v.at(r, p) = vrp * gpp + vrq * gqp;
                    v.at(r, q) = vrp * gpq + vrq * gqq;
                }
            }
        }
    }

    EigenSystem es;
    es.dim = n;
    std::array<int, 3> idx{0, 1, 2};
    std::array<double, 3> vals{};
    for (int i = 0; i < n; ++i) vals[i] = a.at(i, i).real();
    std::sort(idx.begin(), idx.begin() + n, [&](int x, int y) { return vals[x] > vals[y]; });
    for (int i = 0; i < n; ++i) {
        es.values[i] = vals[idx[i]];
        for (int r = 0; r < n; ++r) es.vectors[i][r] = v.at(r, idx[i]);
    }
    return es;
}

// Hermitian square root via eigen-decomposition; negative eigenvalues within
// -tol are clamped to zero, below that the matrix is rejected.
inline CMat hermitian_sqrt(const CMat& h, double tol = 1e-12) {
    EigenSystem es = eigen_hermitian(h);
    CMat out(h.dim);
    double scale = std::max(1.0, std::abs(es.values[0]));
    for (int i = 0; i < h.dim; ++i) {
        double lam = es.values[i];
        if (lam < -tol * scale)
            throw std::invalid_argument("hermitian_sqrt: matrix is not PSD (eigenvalue " +
                                        std::to_string(lam) + ")");
        double s = lam > 0 ? std::sqrt(lam) : 0.0;
        for (int r = 0; r < h.dim; ++r)
            for (int c = 0; c < h.dim; ++c)
                out.at(r, c) += s * es.vectors[i][r] * std::conj(es.vectors[i][c]);
    }
    return out;
}

// Determinant for dim <= 3.
inline cd determinant(const CMat& a) {
    switch (a.dim) {
        case 1:
            return a.at(0, 0);
        case 2:
            return a.at(0, 0) * a.at(1, 1) - a.at(0, 1) * a.at(1, 0);
        case 3:
            return a.at(0, 0) * (a.at(1, 1) * a.at(2, 2) - a.at(1, 2) * a.at(2, 1)) -
                   a.at(0, 1) * (a.at(1, 0) * a.at(2, 2) - a.at(1, 2) * a.at(2, 0)) +
                   a.at(0, 2) * (a.at(1, 0) * a.at(2, 1) - a.at(1, 1) * a.at(2, 0));
        default:
            throw std::invalid_argument("determinant: dim must be 1..3");
    }
}

// Adjugate-based inverse for dim <= 3.
inline CMat inverse(const CMat& a) {
    cd det = determinant(a);
    if (std::abs(det) == 0.0) throw std::invalid_argument("inverse: singular matrix");
    CMat out(a.dim);
    if (a.dim == 1) {
        out.at(0, 0) = 1.0 / det;
        return out;
    }
    if (a.dim == 2) {
        out.at(0, 0) = a.at(1, 1) / det;
        out.at(0, 1) = -a.at(0, 1) / det;
        out.at(1, 0) = -a.at(1, 0) / det;
        out.at(1, 1) = a.at(0, 0) / det;
        return out;
    }
    auto cof = [&](int r, int c) {
        int r0 = (r + 1) % 3, r1 = (r + 2) % 3;
        int c0 = (c + 1) % 3, c1 = (c + 2) % 3;
        return a.at(r0, c0) * a.at(r1, c1) - a.at(r0, c1) * a.at(r1, c0);
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.at(r, c) = cof(c, r) / det;
    return out;
}

}  // namespace pgil
