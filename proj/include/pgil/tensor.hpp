#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgil {

// Up to 4-D dense shape (batch, channel, height, width). Lower-rank tensors
// keep trailing dims at 1.
struct Shape {
    int n = 1, c = 1, h = 1, w = 1;

    Shape() = default;
    Shape(int n_, int c_, int h_ = 1, int w_ = 1) : n(n_), c(c_), h(h_), w(w_) {}

    std::size_t numel() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }

    bool operator==(const Shape& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::string str() const {
        return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + "]";
    }
};

struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.numel(), fill) {}

    static Tensor zeros(Shape s) { return Tensor(s); }
    static Tensor full(Shape s, double v) { return Tensor(s, v); }
    static Tensor scalar(double v) { return Tensor(Shape(1, 1, 1, 1), v); }

    std::size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }

    double& at(int n, int c, int h, int w) {
        return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) * shape.w + w];
    }
    double at(int n, int c, int h, int w) const {
        return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) * shape.w + w];
    }
};

// C[M x N] += A[M x K] * B[K x N], all row-major. Register-tiled 4x16
// microkernel on the interior, scalar edges.
inline void gemm_acc(int M, int N, int K, const double* A, const double* B, double* C) {
    constexpr int MR = 4, NR = 16;
    const int m_main = M - M % MR;
    const int n_main = N - N % NR;

    for (int i0 = 0; i0 < m_main; i0 += MR) {
        for (int j0 = 0; j0 < n_main; j0 += NR) {
            double acc[MR][NR];
            for (int i = 0; i < MR; ++i)
                for (int j = 0; j < NR; ++j) acc[i][j] = C[(i0 + i) * static_cast<std::size_t>(N) + j0 + j];
            const double* a0 = A + static_cast<std::size_t>(i0) * K;
            const double* a1 = a0 + K;
            const double* a2 = a1 + K;
            const double* a3 = a2 + K;
            for (int k = 0; k < K; ++k) {
                const double* b = B + static_cast<std::size_t>(k) * N + j0;
                const double x0 = a0[k], x1 = a1[k], x2 = a2[k], x3 = a3[k];
                for (int j = 0; j < NR; ++j) {
                    const double bj = b[j];
                    acc[0][j] += x0 * bj;
                    acc[1][j] += x1 * bj;
                    acc[2][j] += x2 * bj;
                    acc[3][j] += x3 * bj;
                }
            }
            for (int i = 0; i < MR; ++i)
                for (int j = 0; j < NR; ++j) C[(i0 + i) * static_cast<std::size_t>(N) + j0 + j] = acc[i][j];
        }
        // N remainder
        for (int i = i0; i < i0 + MR; ++i) {
            const double* a = A + static_cast<std::size_t>(i) * K;
            double* c = C + static_cast<std::size_t>(i) * N;
            for (int k = 0; k < K; ++k) {
                const double x = a[k];
                const double* b = B + static_cast<std::size_t>(k) * N;
                for (int j = n_main; j < N; ++j) c[j] += x * b[j];
            }
        }
    }
    // M remainder
    for (int i = m_main; i < M; ++i) {
        const double* a = A + static_cast<std::size_t>(i) * K;
        double* c = C + static_cast<std::size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const double x = a[k];
            const double* b = B + static_cast<std::size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += x * b[j];
        }
    }
}

inline void transpose(const double* in, int rows, int cols, double* out) {
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[static_cast<std::size_t>(c) * rows + r] = in[static_cast<std::size_t>(r) * cols + c];
}

}  // namespace pgil
