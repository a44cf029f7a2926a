#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pgil/autodiff.hpp"
#include "pgil/rng.hpp"

namespace pgil {

struct ParamRef {
    std::string name;
    NodePtr node;
};

struct BufferRef {
    std::string name;
    Tensor* tensor;
};

namespace init {

// fan-in-scaled uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]
inline void uniform_fan_in(Tensor& t, int fan_in, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace init

struct Conv2dLayer {
    NodePtr weight;  // [outC, inC, kh, kw]
    NodePtr bias;    // [outC] or null
    int stride = 1;
    int pad = 0;

    static Conv2dLayer make(int in_c, int out_c, int k, int stride, int pad, bool with_bias,
                            Rng& rng) {
        Conv2dLayer layer;
        layer.stride = stride;
        layer.pad = pad;
        Tensor w(Shape(out_c, in_c, k, k));
        init::uniform_fan_in(w, in_c * k * k, rng);
        Graph dummy;  // leaves live independently of any graph
        layer.weight = dummy.leaf(std::move(w), true);
        if (with_bias) {
            Tensor b(Shape(1, out_c));
            init::uniform_fan_in(b, in_c * k * k, rng);
            layer.bias = dummy.leaf(std::move(b), true);
        }
        return layer;
    }

    NodePtr forward(Graph& g, NodePtr x) const { return conv2d(g, x, weight, bias, stride, pad); }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        out.push_back({prefix + ".weight", weight});
        if (bias) out.push_back({prefix + ".bias", bias});
    }
};

struct BatchNorm2dLayer {
    NodePtr gamma;
    NodePtr beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;

    static BatchNorm2dLayer make(int channels, Rng&, double scale_init = 1.0) {
        BatchNorm2dLayer layer;
        Graph dummy;
        layer.gamma = dummy.leaf(Tensor::full(Shape(1, channels), scale_init), true);
        layer.beta = dummy.leaf(Tensor::zeros(Shape(1, channels)), true);
        layer.running_mean = Tensor::zeros(Shape(1, channels));
        layer.running_var = Tensor::full(Shape(1, channels), 1.0);
        return layer;
    }

    NodePtr forward(Graph& g, NodePtr x, bool training) {
        return batchnorm(g, x, gamma, beta, running_mean, running_var, training, momentum);
    }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        out.push_back({prefix + ".gamma", gamma});
        out.push_back({prefix + ".beta", beta});
    }

    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
        out.push_back({prefix + ".running_mean", &running_mean});
        out.push_back({prefix + ".running_var", &running_var});
    }
};

struct LinearLayer {
    NodePtr weight;  // [out, in]
    NodePtr bias;    // [out]

    static LinearLayer make(int in_f, int out_f, Rng& rng) {
        LinearLayer layer;
        Tensor w(Shape(out_f, in_f));
        init::uniform_fan_in(w, in_f, rng);
        Tensor b(Shape(1, out_f));
        init::uniform_fan_in(b, in_f, rng);
        Graph dummy;
        layer.weight = dummy.leaf(std::move(w), true);
        layer.bias = dummy.leaf(std::move(b), true);
        return layer;
    }

    NodePtr forward(Graph& g, NodePtr x) const { return linear(g, x, weight, bias); }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
};

// conv-bn-relu-conv-bn + skip, with a projection shortcut on shape changes.
// The second batchnorm scale starts at zero so a fresh block is the identity.
struct BasicBlock {
    Conv2dLayer conv1;
    BatchNorm2dLayer bn1;
    Conv2dLayer conv2;
    BatchNorm2dLayer bn2;
    bool has_projection = false;
    Conv2dLayer proj_conv;
    BatchNorm2dLayer proj_bn;

    static BasicBlock make(int in_c, int out_c, int stride, Rng& rng) {
        BasicBlock b;
        b.conv1 = Conv2dLayer::make(in_c, out_c, 3, stride, 1, false, rng);
        b.bn1 = BatchNorm2dLayer::make(out_c, rng);
        b.conv2 = Conv2dLayer::make(out_c, out_c, 3, 1, 1, false, rng);
        b.bn2 = BatchNorm2dLayer::make(out_c, rng, 0.0);
        b.has_projection = (stride != 1 || in_c != out_c);
        if (b.has_projection) {
            b.proj_conv = Conv2dLayer::make(in_c, out_c, 1, stride, 0, false, rng);
            b.proj_bn = BatchNorm2dLayer::make(out_c, rng);
        }
        return b;
    }

    NodePtr forward(Graph& g, NodePtr x, bool training) {
        NodePtr y = conv1.forward(g, x);
        y = bn1.forward(g, y, training);
        y = relu(g, y);
        y = conv2.forward(g, y);
        y = bn2.forward(g, y, training);
        NodePtr skip = x;
        if (has_projection) {
            skip = proj_conv.forward(g, x);
            skip = proj_bn.forward(g, skip, training);
        }
        return relu(g, add(g, y, skip));
    }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        conv1.collect(prefix + ".conv1", out);
        bn1.collect(prefix + ".bn1", out);
        conv2.collect(prefix + ".conv2", out);
        bn2.collect(prefix + ".bn2", out);
        if (has_projection) {
            proj_conv.collect(prefix + ".proj", out);
            proj_bn.collect(prefix + ".proj_bn", out);
        }
    }

    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
        bn1.collect_buffers(prefix + ".bn1", out);
        bn2.collect_buffers(prefix + ".bn2", out);
        if (has_projection) proj_bn.collect_buffers(prefix + ".proj_bn", out);
    }
};

// Residual-network layout knobs. The desk profile keeps the topology of the
// full-width network at a quarter of the channel widths and 64x64 inputs.
struct NetProfile {
    std::string name = "desk";
    int in_channels = 1;
    int stem_kernel = 3;
    int stem_stride = 1;
    int stem_pad = 1;
    int stem_pool = 2;  // maxpool kernel/stride after the stem, 0 disables
    std::array<int, 4> widths{16, 32, 64, 128};
    int blocks_per_stage = 2;

    static NetProfile desk() { return NetProfile{}; }

    static NetProfile full() {
        NetProfile p;
        p.name = "full";
        p.stem_kernel = 7;
        p.stem_stride = 2;
        p.stem_pad = 3;
        p.stem_pool = 2;
        p.widths = {64, 128, 256, 512};
        return p;
    }
};

// Stem plus up to four residual stages; stage outputs are exposed so callers
// can tap F_PA (stage 3) or add injected features between stages.
struct Backbone {
    NetProfile profile;
    Conv2dLayer stem;
    BatchNorm2dLayer stem_bn;
    std::vector<std::vector<BasicBlock>> stages;

    static Backbone make(const NetProfile& profile, int n_stages, Rng& rng) {
        Backbone b;
        b.profile = profile;
        b.stem = Conv2dLayer::make(profile.in_channels, profile.widths[0], profile.stem_kernel,
                                   profile.stem_stride, profile.stem_pad, false, rng);
        b.stem_bn = BatchNorm2dLayer::make(profile.widths[0], rng);
        int in_c = profile.widths[0];
        for (int s = 0; s < n_stages; ++s) {
            int out_c = profile.widths[s];
            std::vector<BasicBlock> blocks;
            for (int i = 0; i < profile.blocks_per_stage; ++i) {
                int stride = (i == 0 && s > 0) ? 2 : 1;
                blocks.push_back(BasicBlock::make(in_c, out_c, stride, rng));
                in_c = out_c;
            }
            b.stages.push_back(std::move(blocks));
        }
        return b;
    }

    NodePtr forward_stem(Graph& g, NodePtr x, bool training) {
        NodePtr y = stem.forward(g, x);
        y = stem_bn.forward(g, y, training);
        y = relu(g, y);
        if (profile.stem_pool > 1) y = maxpool2d(g, y, profile.stem_pool, profile.stem_pool);
        return y;
    }

    NodePtr forward_stage(Graph& g, NodePtr x, int stage, bool training) {
        NodePtr y = x;
        for (BasicBlock& blk : stages[stage]) y = blk.forward(g, y, training);
        return y;
    }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        stem.collect(prefix + ".stem", out);
        stem_bn.collect(prefix + ".stem_bn", out);
        for (std::size_t s = 0; s < stages.size(); ++s)
            for (std::size_t i = 0; i < stages[s].size(); ++i)
                stages[s][i].collect(prefix + ".stage" + std::to_string(s + 1) + ".block" +
                                         std::to_string(i),
                                     out);
    }

    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
        stem_bn.collect_buffers(prefix + ".stem_bn", out);
        for (std::size_t s = 0; s < stages.size(); ++s)
            for (std::size_t i = 0; i < stages[s].size(); ++i)
                stages[s][i].collect_buffers(prefix + ".stage" + std::to_string(s + 1) + ".block" +
                                                 std::to_string(i),
                                             out);
    }
};

// SGD with momentum; per-slot learning-rate scaling covers the reduced-rate
// fine-tuning path.
struct Sgd {
    struct Slot {
        NodePtr param;
        Tensor velocity;
        double lr_scale;
    };
    std::vector<Slot> slots;
    double momentum = 0.9;

    void add(const NodePtr& p, double lr_scale = 1.0) {
        slots.push_back({p, Tensor::zeros(p->value.shape), lr_scale});
    }

    void add_all(const std::vector<ParamRef>& params, double lr_scale = 1.0) {
        for (const ParamRef& p : params) add(p.node, lr_scale);
    }

    void step(double lr) {
        for (Slot& s : slots) {
            if (s.param->grad.empty()) continue;
            for (std::size_t i = 0; i < s.velocity.numel(); ++i) {
                s.velocity.data[i] = momentum * s.velocity.data[i] + s.param->grad.data[i];
                s.param->value.data[i] -= lr * s.lr_scale * s.velocity.data[i];
            }
        }
    }

    void zero_grad() {
        for (Slot& s : slots)
            if (!s.param->grad.empty())
                std::fill(s.param->grad.data.begin(), s.param->grad.data.end(), 0.0);
    }
};

// Cosine decay from lr_max to lr_min over the epochs before the floor window;
// the final floor_epochs run at lr_min.
inline double cosine_lr(int epoch, int total_epochs, double lr_max, double lr_min,
                        int floor_epochs = 3) {
    int horizon = total_epochs - floor_epochs;
    if (horizon < 1 || epoch >= horizon) return lr_min;
    double t = static_cast<double>(epoch) / static_cast<double>(horizon);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace pgil
