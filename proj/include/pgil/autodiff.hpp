#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgil/tensor.hpp"

namespace pgil {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<NodePtr> inputs;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
        if (grad.empty()) grad = Tensor::zeros(value.shape);
    }
};

[[noreturn]] inline void shape_error(const std::string& op, const std::string& detail) {
    throw std::invalid_argument(op + ": " + detail);
}

// Records ops in execution order; backward walks the tape in reverse.
class Graph {
public:
    NodePtr leaf(Tensor value, bool requires_grad = false) {
        auto node = std::make_shared<Node>();
        node->value = std::move(value);
        node->requires_grad = requires_grad;
        return node;
    }

    NodePtr record(Tensor value, std::vector<NodePtr> inputs,
                   std::function<void(Node&)> backward_fn) {
        auto node = std::make_shared<Node>();
        node->value = std::move(value);
        node->inputs = std::move(inputs);
        node->backward_fn = std::move(backward_fn);
        for (const NodePtr& in : node->inputs)
            if (in->requires_grad) node->requires_grad = true;
        tape_.push_back(node);
        return node;
    }

    void backward(const NodePtr& root) {
        if (root->value.numel() != 1)
            shape_error("backward", "root must be a scalar, got " + root->value.shape.str());
        root->ensure_grad();
        root->grad.data[0] = 1.0;
        for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
            Node& node = **it;
            if (!node.requires_grad || node.grad.empty() || !node.backward_fn) continue;
            node.backward_fn(node);
        }
    }

    std::size_t size() const { return tape_.size(); }

private:
    std::vector<NodePtr> tape_;
};

namespace detail {

// x: [C,H,W] plane of one sample -> col [C*kh*kw, OH*OW]
inline void im2col(const double* x, int C, int H, int W, int kh, int kw, int stride, int pad,
                   int OH, int OW, double* col) {
    for (int c = 0; c < C; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                double* row = col + ((static_cast<std::size_t>(c) * kh + ki) * kw + kj) *
                                        (static_cast<std::size_t>(OH) * OW);
                for (int oh = 0; oh < OH; ++oh) {
                    int ih = oh * stride - pad + ki;
                    double* dst = row + static_cast<std::size_t>(oh) * OW;
                    if (ih < 0 || ih >= H) {
                        for (int ow = 0; ow < OW; ++ow) dst[ow] = 0.0;
                        continue;
                    }
                    const double* src = x + (static_cast<std::size_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        int iw = ow * stride - pad + kj;
                        dst[ow] = (iw < 0 || iw >= W) ? 0.0 : src[iw];
                    }
                }
            }
        }
    }
}

inline void col2im_acc(const double* col, int C, int H, int W, int kh, int kw, int stride, int pad,
                       int OH, int OW, double* x) {
    for (int c = 0; c < C; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const double* row = col + ((static_cast<std::size_t>(c) * kh + ki) * kw + kj) *
                                              (static_cast<std::size_t>(OH) * OW);
                for (int oh = 0; oh < OH; ++oh) {
                    int ih = oh * stride - pad + ki;
                    if (ih < 0 || ih >= H) continue;
                    const double* src = row + static_cast<std::size_t>(oh) * OW;
                    double* dst = x + (static_cast<std::size_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        int iw = ow * stride - pad + kj;
                        if (iw >= 0 && iw < W) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

}  // namespace detail

// 2-D convolution, weight [outC, inC, kh, kw], optional bias [outC].
inline NodePtr conv2d(Graph& g, NodePtr x, NodePtr w, NodePtr b, int stride, int pad) {
    const Shape& xs = x->value.shape;
    const Shape& ws = w->value.shape;
    if (xs.c != ws.c)
        shape_error("conv2d", "input channels " + xs.str() + " vs weight " + ws.str());
    if (b && b->value.shape.numel() != static_cast<std::size_t>(ws.n))
        shape_error("conv2d", "bias length does not match out channels " + ws.str());

    const int N = xs.n, C = xs.c, H = xs.h, W = xs.w;
    const int OC = ws.n, KH = ws.h, KW = ws.w;
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
    if (OH < 1 || OW < 1) shape_error("conv2d", "empty output for input " + xs.str());

    const int K = C * KH * KW;
    const std::size_t plane_in = static_cast<std::size_t>(C) * H * W;
    const std::size_t plane_out = static_cast<std::size_t>(OC) * OH * OW;
    const std::size_t cols = static_cast<std::size_t>(OH) * OW;

    Tensor out(Shape(N, OC, OH, OW));
    std::vector<double> col(static_cast<std::size_t>(K) * cols);
    for (int n = 0; n < N; ++n) {
        detail::im2col(x->value.data.data() + n * plane_in, C, H, W, KH, KW, stride, pad, OH, OW,
                       col.data());
        gemm_acc(OC, static_cast<int>(cols), K, w->value.data.data(), col.data(),
                 out.data.data() + n * plane_out);
        if (b) {
            double* o = out.data.data() + n * plane_out;
            for (int oc = 0; oc < OC; ++oc) {
                double bv = b->value.data[oc];
                for (std::size_t i = 0; i < cols; ++i) o[oc * cols + i] += bv;
            }
        }
    }

    std::vector<NodePtr> inputs = b ? std::vector<NodePtr>{x, w, b} : std::vector<NodePtr>{x, w};
    return g.record(std::move(out), std::move(inputs),
                    [stride, pad, N, C, H, W, OC, KH, KW, OH, OW, K, plane_in, plane_out,
                     cols](Node& node) {
        NodePtr x = node.inputs[0];
        NodePtr w = node.inputs[1];
        NodePtr b = node.inputs.size() > 2 ? node.inputs[2] : nullptr;

        std::vector<double> w_t(static_cast<std::size_t>(K) * OC);
        transpose(w->value.data.data(), OC, K, w_t.data());
        std::vector<double> col(static_cast<std::size_t>(K) * cols);
        std::vector<double> col_t(cols * static_cast<std::size_t>(K));
        std::vector<double> dcol(static_cast<std::size_t>(K) * cols);

        if (x->requires_grad) x->ensure_grad();
        if (w->requires_grad) w->ensure_grad();
        if (b && b->requires_grad) b->ensure_grad();

        for (int n = 0; n < N; ++n) {
            const double* dy = node.grad.data.data() + n * plane_out;
            if (x->requires_grad) {
                std::fill(dcol.begin(), dcol.end(), 0.0);
                gemm_acc(K, static_cast<int>(cols), OC, w_t.data(), dy, dcol.data());
                detail::col2im_acc(dcol.data(), C, H, W, KH, KW, stride, pad, OH, OW,
                                   x->grad.data.data() + n * plane_in);
            }
            if (w->requires_grad) {
                detail::im2col(x->value.data.data() + n * plane_in, C, H, W, KH, KW, stride, pad,
                               OH, OW, col.data());
                transpose(col.data(), K, static_cast<int>(cols), col_t.data());
                gemm_acc(OC, K, static_cast<int>(cols), dy, col_t.data(), w->grad.data.data());
            }
            if (b && b->requires_grad) {
                for (int oc = 0; oc < OC; ++oc) {
                    double s = 0;
                    for (std::size_t i = 0; i < cols; ++i) s += dy[oc * cols + i];
                    b->grad.data[oc] += s;
                }
            }
        }
    });
}

// Per-channel batch normalization. In training mode batch statistics are used
// and running stats updated in place; in eval mode the running stats are used.
inline NodePtr batchnorm(Graph& g, NodePtr x, NodePtr gamma, NodePtr beta, Tensor& running_mean,
                         Tensor& running_var, bool training, double momentum = 0.1,
                         double eps = 1e-5) {
    const Shape& xs = x->value.shape;
    const int N = xs.n, C = xs.c, H = xs.h, W = xs.w;
    if (gamma->value.numel() != static_cast<std::size_t>(C) ||
        beta->value.numel() != static_cast<std::size_t>(C))
        shape_error("batchnorm", "scale/shift length != channels of " + xs.str());

    const std::size_t hw = static_cast<std::size_t>(H) * W;
    const std::size_t chw = static_cast<std::size_t>(C) * hw;
    const double m = static_cast<double>(N) * static_cast<double>(hw);

    std::vector<double> mean(C), inv_std(C);
    if (training) {
        for (int c = 0; c < C; ++c) {
            double s = 0;
            for (int n = 0; n < N; ++n) {
                const double* p = x->value.data.data() + n * chw + c * hw;
                for (std::size_t i = 0; i < hw; ++i) s += p[i];
            }
            mean[c] = s / m;
            double v = 0;
            for (int n = 0; n < N; ++n) {
                const double* p = x->value.data.data() + n * chw + c * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    double d = p[i] - mean[c];
                    v += d * d;
                }
            }
            double var = v / m;
            inv_std[c] = 1.0 / std::sqrt(var + eps);
            running_mean.data[c] = (1.0 - momentum) * running_mean.data[c] + momentum * mean[c];
            running_var.data[c] = (1.0 - momentum) * running_var.data[c] + momentum * var;
        }
    } else {
        for (int c = 0; c < C; ++c) {
            mean[c] = running_mean.data[c];
            inv_std[c] = 1.0 / std::sqrt(running_var.data[c] + eps);
        }
    }

    Tensor out(xs);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double* p = x->value.data.data() + n * chw + c * hw;
            double* o = out.data.data() + n * chw + c * hw;
            const double gmul = gamma->value.data[c] * inv_std[c];
            const double gadd = beta->value.data[c] - gmul * mean[c];
            for (std::size_t i = 0; i < hw; ++i) o[i] = gmul * p[i] + gadd;
        }

    return g.record(std::move(out), {x, gamma, beta},
                    [mean, inv_std, training, N, C, hw, chw, m](Node& node) {
        NodePtr x = node.inputs[0];
        NodePtr gamma = node.inputs[1];
        NodePtr beta = node.inputs[2];
        if (x->requires_grad) x->ensure_grad();
        if (gamma->requires_grad) gamma->ensure_grad();
        if (beta->requires_grad) beta->ensure_grad();

        for (int c = 0; c < C; ++c) {
            // channel-wise reductions of dy and dy * xhat
            double sum_dy = 0, sum_dy_xhat = 0;
            for (int n = 0; n < N; ++n) {
                const double* dy = node.grad.data.data() + n * chw + c * hw;
                const double* p = x->value.data.data() + n * chw + c * hw;
                for (std::size_t i = 0; i < hw; ++i) {
                    double xhat = (p[i] - mean[c]) * inv_std[c];
                    sum_dy += dy[i];
                    sum_dy_xhat += dy[i] * xhat;
                }
            }
            if (gamma->requires_grad) gamma->grad.data[c] += sum_dy_xhat;
            if (beta->requires_grad) beta->grad.data[c] += sum_dy;
            if (!x->requires_grad) continue;

            const double gis = gamma->value.data[c] * inv_std[c];
            if (training) {
                const double mean_dy = sum_dy / m;
                const double mean_dy_xhat = sum_dy_xhat / m;
                for (int n = 0; n < N; ++n) {
                    const double* dy = node.grad.data.data() + n * chw + c * hw;
                    const double* p = x->value.data.data() + n * chw + c * hw;
                    double* dx = x->grad.data.data() + n * chw + c * hw;
                    for (std::size_t i = 0; i < hw; ++i) {
                        double xhat = (p[i] - mean[c]) * inv_std[c];
                        dx[i] += gis * (dy[i] - mean_dy - xhat * mean_dy_xhat);
                    }
                }
            } else {
                for (int n = 0; n < N; ++n) {
                    const double* dy = node.grad.data.data() + n * chw + c * hw;
                    double* dx = x->grad.data.data() + n * chw + c * hw;
                    for (std::size_t i = 0; i < hw; ++i) dx[i] += gis * dy[i];
                }
            }
        }
    });
}

inline NodePtr relu(Graph& g, NodePtr x) {
    Tensor out(x->value.shape);
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = x->value.data[i] > 0 ? x->value.data[i] : 0.0;
    return g.record(std::move(out), {x}, [](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i)
            if (x->value.data[i] > 0) x->grad.data[i] += node.grad.data[i];
    });
}

inline NodePtr add(Graph& g, NodePtr a, NodePtr b) {
    if (a->value.shape != b->value.shape)
        shape_error("add", a->value.shape.str() + " vs " + b->value.shape.str());
    Tensor out(a->value.shape);
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = a->value.data[i] + b->value.data[i];
    return g.record(std::move(out), {a, b}, [](Node& node) {
        for (int k = 0; k < 2; ++k) {
            NodePtr in = node.inputs[k];
            if (!in->requires_grad) continue;
            in->ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i)
                in->grad.data[i] += node.grad.data[i];
        }
    });
}

inline NodePtr scale(Graph& g, NodePtr x, double s) {
    Tensor out(x->value.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = s * x->value.data[i];
    return g.record(std::move(out), {x}, [s](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i)
            x->grad.data[i] += s * node.grad.data[i];
    });
}

inline NodePtr maxpool2d(Graph& g, NodePtr x, int k, int stride) {
    const Shape& xs = x->value.shape;
    const int OH = (xs.h - k) / stride + 1;
    const int OW = (xs.w - k) / stride + 1;
    if (OH < 1 || OW < 1) shape_error("maxpool2d", "kernel larger than input " + xs.str());

    Tensor out(Shape(xs.n, xs.c, OH, OW));
    std::vector<std::size_t> argmax(out.numel());
    std::size_t o = 0;
    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c)
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow, ++o) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_i = 0;
                    for (int i = 0; i < k; ++i)
                        for (int j = 0; j < k; ++j) {
                            int ih = oh * stride + i, iw = ow * stride + j;
                            std::size_t idx =
                                ((static_cast<std::size_t>(n) * xs.c + c) * xs.h + ih) * xs.w + iw;
                            if (x->value.data[idx] > best) {
                                best = x->value.data[idx];
                                best_i = idx;
                            }
                        }
                    out.data[o] = best;
                    argmax[o] = best_i;
                }

    return g.record(std::move(out), {x}, [argmax = std::move(argmax)](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i)
            x->grad.data[argmax[i]] += node.grad.data[i];
    });
}

inline NodePtr avgpool2d(Graph& g, NodePtr x, int k, int stride) {
    const Shape& xs = x->value.shape;
    const int OH = (xs.h - k) / stride + 1;
    const int OW = (xs.w - k) / stride + 1;
    if (OH < 1 || OW < 1) shape_error("avgpool2d", "kernel larger than input " + xs.str());
    const double inv = 1.0 / (static_cast<double>(k) * k);

    Tensor out(Shape(xs.n, xs.c, OH, OW));
    std::size_t o = 0;
    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c)
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow, ++o) {
                    double s = 0;
                    for (int i = 0; i < k; ++i)
                        for (int j = 0; j < k; ++j)
                            s += x->value.at(n, c, oh * stride + i, ow * stride + j);
                    out.data[o] = s * inv;
                }

    return g.record(std::move(out), {x}, [k, stride, inv](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        const Shape& os = node.value.shape;
        std::size_t o = 0;
        for (int n = 0; n < os.n; ++n)
            for (int c = 0; c < os.c; ++c)
                for (int oh = 0; oh < os.h; ++oh)
                    for (int ow = 0; ow < os.w; ++ow, ++o) {
                        double gv = node.grad.data[o] * inv;
                        for (int i = 0; i < k; ++i)
                            for (int j = 0; j < k; ++j)
                                x->grad.at(n, c, oh * stride + i, ow * stride + j) += gv;
                    }
    });
}

// [N,C,H,W] -> [N,C] channel-wise spatial mean.
inline NodePtr global_avg_pool(Graph& g, NodePtr x) {
    const Shape& xs = x->value.shape;
    const std::size_t hw = static_cast<std::size_t>(xs.h) * xs.w;
    const double inv = 1.0 / static_cast<double>(hw);

    Tensor out(Shape(xs.n, xs.c));
    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c) {
            const double* p = x->value.data.data() + (static_cast<std::size_t>(n) * xs.c + c) * hw;
            double s = 0;
            for (std::size_t i = 0; i < hw; ++i) s += p[i];
            out.data[static_cast<std::size_t>(n) * xs.c + c] = s * inv;
        }

    return g.record(std::move(out), {x}, [hw, inv](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        const Shape& os = node.value.shape;
        for (int n = 0; n < os.n; ++n)
            for (int c = 0; c < os.c; ++c) {
                double gv = node.grad.data[static_cast<std::size_t>(n) * os.c + c] * inv;
                double* dx = x->grad.data.data() + (static_cast<std::size_t>(n) * os.c + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) dx[i] += gv;
            }
    });
}

// x [N,D] * w [O,D]^T + b -> [N,O]
inline NodePtr linear(Graph& g, NodePtr x, NodePtr w, NodePtr b) {
    const Shape& xs = x->value.shape;
    const Shape& ws = w->value.shape;
    if (xs.h != 1 || xs.w != 1 || ws.h != 1 || ws.w != 1 || xs.c != ws.c)
        shape_error("linear", "input " + xs.str() + " vs weight " + ws.str());
    if (b && b->value.numel() != static_cast<std::size_t>(ws.n))
        shape_error("linear", "bias length != out features");

    const int N = xs.n, D = xs.c, O = ws.n;
    Tensor out(Shape(N, O));
    std::vector<double> w_t(static_cast<std::size_t>(D) * O);
    transpose(w->value.data.data(), O, D, w_t.data());
    gemm_acc(N, O, D, x->value.data.data(), w_t.data(), out.data.data());
    if (b)
        for (int n = 0; n < N; ++n)
            for (int o = 0; o < O; ++o) out.data[static_cast<std::size_t>(n) * O + o] += b->value.data[o];

    std::vector<NodePtr> inputs = b ? std::vector<NodePtr>{x, w, b} : std::vector<NodePtr>{x, w};
    return g.record(std::move(out), std::move(inputs), [N, D, O](Node& node) {
        NodePtr x = node.inputs[0];
        NodePtr w = node.inputs[1];
        NodePtr b = node.inputs.size() > 2 ? node.inputs[2] : nullptr;
        if (x->requires_grad) {
            x->ensure_grad();
            gemm_acc(N, D, O, node.grad.data.data(), w->value.data.data(), x->grad.data.data());
        }
        if (w->requires_grad) {
            w->ensure_grad();
            std::vector<double> dy_t(static_cast<std::size_t>(O) * N);
            transpose(node.grad.data.data(), N, O, dy_t.data());
            gemm_acc(O, D, N, dy_t.data(), x->value.data.data(), w->grad.data.data());
        }
        if (b && b->requires_grad) {
            b->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int o = 0; o < O; ++o)
                    b->grad.data[o] += node.grad.data[static_cast<std::size_t>(n) * O + o];
        }
    });
}

// 2x nearest-neighbor upsampling.
inline NodePtr upsample_nearest2(Graph& g, NodePtr x) {
    const Shape& xs = x->value.shape;
    Tensor out(Shape(xs.n, xs.c, xs.h * 2, xs.w * 2));
    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c)
            for (int h = 0; h < xs.h * 2; ++h)
                for (int w = 0; w < xs.w * 2; ++w)
                    out.at(n, c, h, w) = x->value.at(n, c, h / 2, w / 2);

    return g.record(std::move(out), {x}, [](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        const Shape& os = node.value.shape;
        for (int n = 0; n < os.n; ++n)
            for (int c = 0; c < os.c; ++c)
                for (int h = 0; h < os.h; ++h)
                    for (int w = 0; w < os.w; ++w)
                        x->grad.at(n, c, h / 2, w / 2) += node.grad.at(n, c, h, w);
    });
}

// Row-wise log-softmax over the channel dim of [N,C].
inline NodePtr log_softmax(Graph& g, NodePtr x) {
    const Shape& xs = x->value.shape;
    if (xs.h != 1 || xs.w != 1) shape_error("log_softmax", "expected [N,C], got " + xs.str());
    const int N = xs.n, C = xs.c;

    Tensor out(xs);
    for (int n = 0; n < N; ++n) {
        const double* p = x->value.data.data() + static_cast<std::size_t>(n) * C;
        double* o = out.data.data() + static_cast<std::size_t>(n) * C;
        double mx = p[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, p[c]);
        double lse = 0;
        for (int c = 0; c < C; ++c) lse += std::exp(p[c] - mx);
        lse = mx + std::log(lse);
        for (int c = 0; c < C; ++c) o[c] = p[c] - lse;
    }

    return g.record(std::move(out), {x}, [N, C](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (int n = 0; n < N; ++n) {
            const double* dy = node.grad.data.data() + static_cast<std::size_t>(n) * C;
            const double* y = node.value.data.data() + static_cast<std::size_t>(n) * C;
            double* dx = x->grad.data.data() + static_cast<std::size_t>(n) * C;
            double sum_dy = 0;
            for (int c = 0; c < C; ++c) sum_dy += dy[c];
            for (int c = 0; c < C; ++c) dx[c] += dy[c] - std::exp(y[c]) * sum_dy;
        }
    });
}

// Scalar inner product with a constant coefficient tensor.
inline NodePtr weighted_sum(Graph& g, NodePtr x, Tensor coeff) {
    if (coeff.shape != x->value.shape)
        shape_error("weighted_sum", "coeff " + coeff.shape.str() + " vs " + x->value.shape.str());
    double s = 0;
    for (std::size_t i = 0; i < coeff.numel(); ++i) s += coeff.data[i] * x->value.data[i];
    return g.record(Tensor::scalar(s), {x}, [coeff = std::move(coeff)](Node& node) {
        NodePtr x = node.inputs[0];
        if (!x->requires_grad) return;
        x->ensure_grad();
        const double gv = node.grad.data[0];
        for (std::size_t i = 0; i < coeff.numel(); ++i)
            x->grad.data[i] += gv * coeff.data[i];
    });
}

}  // namespace pgil
