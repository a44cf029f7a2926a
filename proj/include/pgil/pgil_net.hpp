#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgil/image.hpp"
#include "pgil/nn.hpp"
#include "pgil/topic_model.hpp"

namespace pgil {

enum class ConstraintMode { soft, hard };

inline ConstraintMode constraint_from_string(const std::string& s) {
    if (s == "soft") return ConstraintMode::soft;
    if (s == "hard") return ConstraintMode::hard;
    throw std::invalid_argument("unknown constraint mode: " + s);
}

struct TrainConfig {
    double lr = 0.05;
    double momentum = 0.9;
    int epochs = 20;
    int batch = 32;
    std::string schedule = "fixed";  // "fixed" | "cosine"
    double lr_min = 1e-8;
    int cosine_floor_epochs = 3;
    double lambda = 0.1;
    double mask_alpha = 0.1;  // activation threshold on y_phy
    double mask_pa = 0.9;     // keep probability for activated topics
    ConstraintMode constraint = ConstraintMode::soft;
    bool sal = true;
    double sal_lr_scale = 0.1;
    std::uint64_t seed = 0;
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0;
    double lr = 0;
};

// Stochastic topic-activation mask: delta_k = Bernoulli(p_a) where
// y_phy_k >= alpha, else 0.
struct ActivationMask {
    Tensor delta;  // [N, K] of 0/1
    double alpha = 0;
    double p_a = 0;
};

inline ActivationMask sample_activation_mask(const std::vector<const BoTVector*>& y_phy,
                                             double alpha, double p_a, Rng& rng) {
    if (y_phy.empty()) throw std::invalid_argument("sample_activation_mask: empty batch");
    const int n = static_cast<int>(y_phy.size());
    const int k = static_cast<int>(y_phy[0]->size());
    ActivationMask mask;
    mask.alpha = alpha;
    mask.p_a = p_a;
    mask.delta = Tensor::zeros(Shape(n, k));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            if ((*y_phy[i])[j] >= alpha && rng.uniform() < p_a)
                mask.delta.data[static_cast<std::size_t>(i) * k + j] = 1.0;
    return mask;
}

inline ActivationMask sample_activation_mask(const BoTVector& y_phy, double alpha, double p_a,
                                             Rng& rng) {
    return sample_activation_mask(std::vector<const BoTVector*>{&y_phy}, alpha, p_a, rng);
}

// Masked semantic-relation loss between the guidance signal and the mapped
// image features, batch mean. Soft mode aligns only activated topics; hard
// mode additionally pushes apart the topics below the significance threshold
// (the ones outside the visually representable set). Activated topics that
// the Bernoulli mask happens to drop stay out of both terms: pushing them
// apart would punish topics that are genuinely present and makes the loss
// dive unboundedly.
inline NodePtr pgn_loss(Graph& g, NodePtr phi, const Tensor& y_phy, const Tensor& delta,
                        ConstraintMode mode, double mask_alpha = 0.1) {
    const Shape& ps = phi->value.shape;
    if (y_phy.shape != ps || delta.shape != ps)
        shape_error("pgn_loss", "phi " + ps.str() + " vs y_phy " + y_phy.shape.str() +
                                    " vs delta " + delta.shape.str());
    NodePtr ls = log_softmax(g, phi);
    Tensor coeff(ps);
    const double inv_n = 1.0 / static_cast<double>(ps.n);
    for (std::size_t i = 0; i < coeff.numel(); ++i) {
        double c = y_phy.data[i] * delta.data[i];
        if (mode == ConstraintMode::hard && y_phy.data[i] < mask_alpha)
            c -= y_phy.data[i];
        coeff.data[i] = -c * inv_n;
    }
    return weighted_sum(g, ls, std::move(coeff));
}

// Mean cross entropy of softmax(scores) against integer targets.
inline NodePtr cross_entropy(Graph& g, NodePtr scores, const std::vector<int>& targets) {
    const Shape& ss = scores->value.shape;
    if (static_cast<std::size_t>(ss.n) != targets.size())
        shape_error("cross_entropy", "scores " + ss.str() + " vs " +
                                         std::to_string(targets.size()) + " targets");
    NodePtr ls = log_softmax(g, scores);
    Tensor coeff(ss);
    const double inv_n = 1.0 / static_cast<double>(ss.n);
    for (int n = 0; n < ss.n; ++n) {
        if (targets[n] < 0 || targets[n] >= ss.c)
            shape_error("cross_entropy", "target out of range");
        coeff.data[static_cast<std::size_t>(n) * ss.c + targets[n]] = -inv_n;
    }
    return weighted_sum(g, ls, std::move(coeff));
}

// Physics guided network: three residual stages plus the physics mapping
// layer projecting image features into the K-dim topic space.
struct PgnModel {
    NetProfile profile;
    int n_topics = 0;
    Backbone backbone;  // stem + stages 1..3
    Conv2dLayer pml_conv;
    BatchNorm2dLayer pml_bn;
    LinearLayer pml_fc;
    double input_mean = 0;
    double input_std = 1;
    std::uint64_t seed = 0;
    int trained_epochs = 0;

    static PgnModel make(const NetProfile& profile, int n_topics, std::uint64_t seed) {
        Rng rng(seed, 0xF9);
        PgnModel m;
        m.profile = profile;
        m.n_topics = n_topics;
        m.seed = seed;
        m.backbone = Backbone::make(profile, 3, rng);
        int c3 = profile.widths[2];
        m.pml_conv = Conv2dLayer::make(c3, c3, 3, 1, 1, false, rng);
        m.pml_bn = BatchNorm2dLayer::make(c3, rng);
        m.pml_fc = LinearLayer::make(c3, n_topics, rng);
        return m;
    }

    std::vector<ParamRef> backbone_params() const {
        std::vector<ParamRef> out;
        backbone.collect("backbone", out);
        return out;
    }

    std::vector<ParamRef> params() const {
        std::vector<ParamRef> out;
        backbone.collect("backbone", out);
        pml_conv.collect("pml.conv", out);
        pml_bn.collect("pml.bn", out);
        pml_fc.collect("pml.fc", out);
        return out;
    }

    std::vector<BufferRef> buffers() {
        std::vector<BufferRef> out;
        backbone.collect_buffers("backbone", out);
        pml_bn.collect_buffers("pml.bn", out);
        return out;
    }
};

// F_PA: the output of the third residual stage.
inline NodePtr forward_backbone(Graph& g, PgnModel& m, NodePtr x, bool training) {
    NodePtr y = m.backbone.forward_stem(g, x, training);
    for (int s = 0; s < 3; ++s) y = m.backbone.forward_stage(g, y, s, training);
    return y;
}

// phi_I: conv-bn-relu, global average pool, linear to K. Raw scores; the
// softmax lives inside the loss.
inline NodePtr forward_pml(Graph& g, PgnModel& m, NodePtr fpa, bool training) {
    NodePtr y = m.pml_conv.forward(g, fpa);
    y = m.pml_bn.forward(g, y, training);
    y = relu(g, y);
    y = global_avg_pool(g, y);
    return m.pml_fc.forward(g, y);
}

// 1x1 conv to the site's channel width plus the spatial resample that matches
// F_PA to the site: 2x nearest upsample at site 2, identity at site 3, 2x
// average pool at site 4. Zero-initialized so injection starts neutral.
struct TransformLayer {
    Conv2dLayer conv;

    static TransformLayer make(int in_c, int out_c) {
        TransformLayer t;
        Rng rng(0);
        t.conv = Conv2dLayer::make(in_c, out_c, 1, 1, 0, true, rng);
        std::fill(t.conv.weight->value.data.begin(), t.conv.weight->value.data.end(), 0.0);
        std::fill(t.conv.bias->value.data.begin(), t.conv.bias->value.data.end(), 0.0);
        return t;
    }

    void collect(const std::string& prefix, std::vector<ParamRef>& out) const {
        conv.collect(prefix, out);
    }
};

inline NodePtr transform_inject(Graph& g, TransformLayer& t, NodePtr fpa, int site) {
    if (site < 2 || site > 4) throw std::invalid_argument("transform_inject: site must be 2..4");
    NodePtr y = t.conv.forward(g, fpa);
    if (site == 2) return upsample_nearest2(g, y);
    if (site == 4) return avgpool2d(g, y, 2, 2);
    return y;
}

// Physics injected network: the full four-stage classifier with additive
// injection of the transformed physics-aware features at the active sites.
struct PinModel {
    NetProfile profile;
    int n_classes = 0;
    int fpa_channels = 0;  // channel width of whatever is injected
    Backbone backbone;     // stem + stages 1..4
    LinearLayer head;
    std::map<int, TransformLayer> transforms;
    std::set<int> active_sites;
    double input_mean = 0;
    double input_std = 1;
    std::uint64_t seed = 0;
    int trained_epochs = 0;

    static PinModel make(const NetProfile& profile, int n_classes,
                         const std::set<int>& active_sites, int fpa_channels,
                         std::uint64_t seed) {
        Rng rng(seed, 0xC1);
        PinModel m;
        m.profile = profile;
        m.n_classes = n_classes;
        m.fpa_channels = fpa_channels;
        m.active_sites = active_sites;
        m.seed = seed;
        m.backbone = Backbone::make(profile, 4, rng);
        m.head = LinearLayer::make(profile.widths[3], n_classes, rng);
        for (int site : active_sites) {
            if (site < 2 || site > 4)
                throw std::invalid_argument("PinModel: injection site must be in {2,3,4}");
            m.transforms.emplace(site, TransformLayer::make(fpa_channels, profile.widths[site - 1]));
        }
        return m;
    }

    std::vector<ParamRef> params() const {
        std::vector<ParamRef> out;
        backbone.collect("classifier", out);
        head.collect("classifier.head", out);
        for (const auto& [site, t] : transforms) t.collect("transform.inj" + std::to_string(site), out);
        return out;
    }

    std::vector<BufferRef> buffers() {
        std::vector<BufferRef> out;
        backbone.collect_buffers("classifier", out);
        return out;
    }
};

// Classifier forward with additive injection after each active stage.
inline NodePtr forward_pin(Graph& g, PinModel& m, NodePtr x, NodePtr fpa, bool training) {
    if (!m.active_sites.empty() && !fpa)
        throw std::invalid_argument("forward_pin: active sites configured but no features given");
    NodePtr y = m.backbone.forward_stem(g, x, training);
    for (int s = 0; s < 4; ++s) {
        y = m.backbone.forward_stage(g, y, s, training);
        int site = s + 1;
        if (fpa && m.active_sites.count(site))
            y = add(g, y, transform_inject(g, m.transforms.at(site), fpa, site));
    }
    y = global_avg_pool(g, y);
    return m.head.forward(g, y);
}

// Eq. 10 composition: cross entropy plus the lambda-weighted semantic
// relation term when the self-adaptive path is on.
inline NodePtr pin_loss(Graph& g, NodePtr scores, const std::vector<int>& targets, NodePtr phi,
                        const Tensor& y_phy, const Tensor& delta, double lambda,
                        ConstraintMode mode, double mask_alpha = 0.1) {
    NodePtr ce = cross_entropy(g, scores, targets);
    if (!phi || lambda == 0.0) return ce;
    return add(g, ce, scale(g, pgn_loss(g, phi, y_phy, delta, mode, mask_alpha), lambda));
}

namespace detail {

inline Tensor assemble_batch(const std::vector<Raster>& images, const std::vector<int>& idx,
                             double mean, double std_dev) {
    const int n = static_cast<int>(idx.size());
    const int h = images[idx[0]].height, w = images[idx[0]].width;
    Tensor x(Shape(n, 1, h, w));
    const double inv = 1.0 / std_dev;
    for (int i = 0; i < n; ++i) {
        const Raster& img = images[idx[i]];
        if (img.height != h || img.width != w)
            throw std::invalid_argument("assemble_batch: mixed image sizes");
        for (std::size_t p = 0; p < img.data.size(); ++p)
            x.data[static_cast<std::size_t>(i) * h * w + p] = (img.data[p] - mean) * inv;
    }
    return x;
}

inline void input_stats(const std::vector<Raster>& images, double& mean, double& std_dev) {
    double s = 0;
    std::size_t count = 0;
    for (const Raster& img : images) {
        for (double v : img.data) s += v;
        count += img.data.size();
    }
    mean = s / static_cast<double>(count);
    double v = 0;
    for (const Raster& img : images)
        for (double x : img.data) v += (x - mean) * (x - mean);
    std_dev = std::sqrt(v / static_cast<double>(count));
    if (!(std_dev > 0)) std_dev = 1.0;
}

}  // namespace detail

// Unsupervised physics guided training on Img-Phy pairs: SGD with momentum on
// the masked guidance loss, a fresh activation mask every step.
inline PgnModel train_pgn(const std::vector<Raster>& images, const std::vector<BoTVector>& y_phy,
                          const NetProfile& profile, const TrainConfig& config,
                          std::vector<EpochLog>* logs = nullptr) {
    if (images.empty() || images.size() != y_phy.size())
        throw std::invalid_argument("train_pgn: images and guidance vectors must pair up");
    const int k = static_cast<int>(y_phy[0].size());

    PgnModel model = PgnModel::make(profile, k, config.seed);
    detail::input_stats(images, model.input_mean, model.input_std);

    Sgd opt;
    opt.momentum = config.momentum;
    opt.add_all(model.params());

    Rng root(config.seed, 0x7A11);
    std::vector<int> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng = root.substream(epoch);
        shuffle_rng.shuffle(order);
        Rng mask_rng = root.substream(0x10000 + epoch);

        double loss_sum = 0;
        int n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min(order.size(),
                                                          start + config.batch));
            Tensor xb = detail::assemble_batch(images, idx, model.input_mean, model.input_std);
            Tensor yb(Shape(static_cast<int>(idx.size()), k));
            std::vector<const BoTVector*> batch_phy;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                batch_phy.push_back(&y_phy[idx[i]]);
                for (int j = 0; j < k; ++j)
                    yb.data[i * k + j] = y_phy[idx[i]][j];
            }
            ActivationMask mask =
                sample_activation_mask(batch_phy, config.mask_alpha, config.mask_pa, mask_rng);

            Graph g;
            NodePtr x = g.leaf(std::move(xb));
            NodePtr fpa = forward_backbone(g, model, x, true);
            NodePtr phi = forward_pml(g, model, fpa, true);
            NodePtr loss = pgn_loss(g, phi, yb, mask.delta, config.constraint, config.mask_alpha);

            double lv = loss->value.data[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train_pgn: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(n_batches));
            loss_sum += lv;
            ++n_batches;

            opt.zero_grad();
            g.backward(loss);
            opt.step(config.lr);
        }
        if (logs) logs->push_back({epoch, loss_sum / n_batches, config.lr});
    }
    model.trained_epochs = config.epochs;
    return model;
}

// Eval-mode F_PA for a list of images, using running batchnorm statistics.
inline Tensor extract_fpa(PgnModel& model, const std::vector<Raster>& images, int batch = 32) {
    const int h = images[0].height, w = images[0].width;
    Tensor out;
    std::vector<int> idx;
    for (std::size_t start = 0; start < images.size(); start += batch) {
        idx.clear();
        for (std::size_t i = start; i < std::min(images.size(), start + batch); ++i)
            idx.push_back(static_cast<int>(i));
        Graph g;
        NodePtr x = g.leaf(detail::assemble_batch(images, idx, model.input_mean, model.input_std));
        NodePtr fpa = forward_backbone(g, model, x, false);
        if (out.empty()) {
            Shape s = fpa->value.shape;
            s.n = static_cast<int>(images.size());
            out = Tensor::zeros(s);
        }
        std::size_t plane = fpa->value.numel() / idx.size();
        std::copy(fpa->value.data.begin(), fpa->value.data.end(),
                  out.data.begin() + start * plane);
    }
    (void)h;
    (void)w;
    return out;
}

// What gets injected during PIN training.
struct InjectionSource {
    PgnModel* pgn = nullptr;               // transformed F_PA from the guided network
    const std::vector<Tensor>* fixed = nullptr;  // per-sample constant maps (BoT broadcast)
};

// Training loop over an already-constructed classifier. Without SAL the
// guided network is frozen (bit-unchanged) and its features are precomputed
// in eval mode; with SAL the guided network joins the graph and trains at a
// reduced rate under the combined loss.
inline PinModel train_pin_on(PinModel model, const std::vector<Raster>& images,
                             const std::vector<int>& labels, InjectionSource source,
                             const std::vector<BoTVector>* y_phy, const TrainConfig& config,
                             std::vector<EpochLog>* logs = nullptr) {
    if (images.empty() || images.size() != labels.size())
        throw std::invalid_argument("train_pin: images and labels must pair up");
    if (config.sal && (!source.pgn || !y_phy))
        throw std::invalid_argument("train_pin: SAL needs the guided network and y_phy");
    const std::set<int>& sites = model.active_sites;
    if (!sites.empty() && !source.pgn && !source.fixed)
        throw std::invalid_argument("train_pin: active sites need an injection source");

    // frozen guided network: features precomputed once in eval mode
    Tensor cached_fpa;
    if (source.pgn && !sites.empty() && !config.sal)
        cached_fpa = extract_fpa(*source.pgn, images, config.batch);

    Sgd opt;
    opt.momentum = config.momentum;
    opt.add_all(model.params());
    if (config.sal) opt.add_all(source.pgn->params(), config.sal_lr_scale);

    Rng root(config.seed, 0xB0B);
    std::vector<int> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double lr = (config.schedule == "cosine")
                        ? cosine_lr(epoch, config.epochs, config.lr, config.lr_min,
                                    config.cosine_floor_epochs)
                        : config.lr;
        Rng shuffle_rng = root.substream(epoch);
        shuffle_rng.shuffle(order);
        Rng mask_rng = root.substream(0x20000 + epoch);

        double loss_sum = 0;
        int n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min(order.size(),
                                                          start + config.batch));
            const int nb = static_cast<int>(idx.size());
            Tensor xb = detail::assemble_batch(images, idx, model.input_mean, model.input_std);
            std::vector<int> yb;
            for (int i : idx) yb.push_back(labels[i]);

            Graph g;
            NodePtr x = g.leaf(std::move(xb));
            NodePtr fpa;
            NodePtr phi;
            Tensor y_phy_b, delta_b;

            if (config.sal) {
                fpa = forward_backbone(g, *source.pgn, x, true);
                phi = forward_pml(g, *source.pgn, fpa, true);
                const int k = source.pgn->n_topics;
                y_phy_b = Tensor::zeros(Shape(nb, k));
                std::vector<const BoTVector*> batch_phy;
                for (int i = 0; i < nb; ++i) {
                    batch_phy.push_back(&(*y_phy)[idx[i]]);
                    for (int j = 0; j < k; ++j) y_phy_b.data[static_cast<std::size_t>(i) * k + j] =
                        (*y_phy)[idx[i]][j];
                }
                delta_b = sample_activation_mask(batch_phy, config.mask_alpha, config.mask_pa,
                                                 mask_rng)
                              .delta;
            } else if (!sites.empty() && source.pgn) {
                Shape s = cached_fpa.shape;
                Tensor fb(Shape(nb, s.c, s.h, s.w));
                std::size_t plane = static_cast<std::size_t>(s.c) * s.h * s.w;
                for (int i = 0; i < nb; ++i)
                    std::copy(cached_fpa.data.begin() + idx[i] * plane,
                              cached_fpa.data.begin() + (idx[i] + 1) * plane,
                              fb.data.begin() + i * plane);
                fpa = g.leaf(std::move(fb));
            } else if (!sites.empty() && source.fixed) {
                const Shape& s = (*source.fixed)[0].shape;
                Tensor fb(Shape(nb, s.c, s.h, s.w));
                std::size_t plane = static_cast<std::size_t>(s.c) * s.h * s.w;
                for (int i = 0; i < nb; ++i)
                    std::copy((*source.fixed)[idx[i]].data.begin(),
                              (*source.fixed)[idx[i]].data.end(), fb.data.begin() + i * plane);
                fpa = g.leaf(std::move(fb));
            }

            NodePtr scores = forward_pin(g, model, x, fpa, true);
            NodePtr loss = config.sal
                               ? pin_loss(g, scores, yb, phi, y_phy_b, delta_b, config.lambda,
                                          config.constraint, config.mask_alpha)
                               : cross_entropy(g, scores, yb);

            double lv = loss->value.data[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train_pin: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(n_batches));
            loss_sum += lv;
            ++n_batches;

            opt.zero_grad();
            g.backward(loss);
            opt.step(lr);
        }
        if (logs) logs->push_back({epoch, loss_sum / n_batches, lr});
    }
    model.trained_epochs = config.epochs;
    return model;
}

// Fresh classifier trained from scratch.
inline PinModel train_pin(const std::vector<Raster>& images, const std::vector<int>& labels,
                          int n_classes, const std::set<int>& sites, InjectionSource source,
                          const std::vector<BoTVector>* y_phy, const NetProfile& profile,
                          const TrainConfig& config, std::vector<EpochLog>* logs = nullptr) {
    int fpa_channels = 0;
    if (source.pgn)
        fpa_channels = source.pgn->profile.widths[2];
    else if (source.fixed)
        fpa_channels = (*source.fixed)[0].shape.c;

    PinModel model = PinModel::make(profile, n_classes, sites, fpa_channels, config.seed);
    if (source.pgn) {
        model.input_mean = source.pgn->input_mean;
        model.input_std = source.pgn->input_std;
    } else {
        detail::input_stats(images, model.input_mean, model.input_std);
    }
    return train_pin_on(std::move(model), images, labels, source, y_phy, config, logs);
}

// Eval-mode class scores.
inline Tensor predict_pin_scores(PinModel& model, const std::vector<Raster>& images,
                                 const InjectionSource& source, int batch = 32) {
    Tensor cached_fpa;
    if (source.pgn && !model.active_sites.empty())
        cached_fpa = extract_fpa(*source.pgn, images, batch);

    Tensor out(Shape(static_cast<int>(images.size()), model.n_classes));
    std::vector<int> idx;
    for (std::size_t start = 0; start < images.size(); start += batch) {
        idx.clear();
        for (std::size_t i = start; i < std::min(images.size(), start + batch); ++i)
            idx.push_back(static_cast<int>(i));
        const int nb = static_cast<int>(idx.size());

        Graph g;
        NodePtr x = g.leaf(detail::assemble_batch(images, idx, model.input_mean, model.input_std));
        NodePtr fpa;
        if (!model.active_sites.empty()) {
            Shape s;
            std::size_t plane = 0;
            if (source.pgn) {
                s = cached_fpa.shape;
                plane = static_cast<std::size_t>(s.c) * s.h * s.w;
                Tensor fb(Shape(nb, s.c, s.h, s.w));
                for (int i = 0; i < nb; ++i)
                    std::copy(cached_fpa.data.begin() + idx[i] * plane,
                              cached_fpa.data.begin() + (idx[i] + 1) * plane,
                              fb.data.begin() + i * plane);
                fpa = g.leaf(std::move(fb));
            } else if (source.fixed) {
                s = (*source.fixed)[0].shape;
                plane = static_cast<std::size_t>(s.c) * s.h * s.w;
                Tensor fb(Shape(nb, s.c, s.h, s.w));
                for (int i = 0; i < nb; ++i)
                    std::copy((*source.fixed)[idx[i]].data.begin(),
                              (*source.fixed)[idx[i]].data.end(), fb.data.begin() + i * plane);
                fpa = g.leaf(std::move(fb));
            } else {
                throw std::invalid_argument("predict_pin_scores: no injection source");
            }
        }
        NodePtr scores = forward_pin(g, model, x, fpa, false);
        std::copy(scores->value.data.begin(), scores->value.data.end(),
                  out.data.begin() + start * model.n_classes);
    }
    return out;
}

inline std::vector<int> predict_pin(PinModel& model, const std::vector<Raster>& images,
                                    const InjectionSource& source, int batch = 32) {
    Tensor scores = predict_pin_scores(model, images, source, batch);
    std::vector<int> pred(images.size());
    for (std::size_t n = 0; n < images.size(); ++n) {
        const double* row = scores.data.data() + n * model.n_classes;
        int best = 0;
        for (int c = 1; c < model.n_classes; ++c)
            if (row[c] > row[best]) best = c;
        pred[n] = best;
    }
    return pred;
}

// Eval-mode stage-3 features of the classifier (for probe comparisons against
// the guided network's F_PA).
inline Tensor extract_pin_stage3(PinModel& model, const std::vector<Raster>& images,
                                 int batch = 32) {
    Tensor out;
    std::vector<int> idx;
    for (std::size_t start = 0; start < images.size(); start += batch) {
        idx.clear();
        for (std::size_t i = start; i < std::min(images.size(), start + batch); ++i)
            idx.push_back(static_cast<int>(i));
        Graph g;
        NodePtr x = g.leaf(detail::assemble_batch(images, idx, model.input_mean, model.input_std));
        NodePtr y = model.backbone.forward_stem(g, x, false);
        for (int s = 0; s < 3; ++s) y = model.backbone.forward_stage(g, y, s, false);
        if (out.empty()) {
            Shape s = y->value.shape;
            s.n = static_cast<int>(images.size());
            out = Tensor::zeros(s);
        }
        std::size_t plane = y->value.numel() / idx.size();
        std::copy(y->value.data.begin(), y->value.data.end(), out.data.begin() + start * plane);
    }
    return out;
}

// Seed a classifier's stem and first three stages from a trained guided
// network (both must share the profile).
inline void transfer_backbone(PinModel& pin, const PgnModel& pgn) {
    auto copy_tensor = [](Tensor& dst, const Tensor& src) {
        if (dst.shape != src.shape)
            throw std::invalid_argument("transfer_backbone: profile mismatch " + dst.shape.str() +
                                        " vs " + src.shape.str());
        dst.data = src.data;
    };
    std::vector<ParamRef> dst_params, src_params;
    pin.backbone.collect("b", dst_params);
    pgn.backbone.collect("b", src_params);
    // guided network has 3 stages; classifier has 4. Names align for the prefix.
    std::size_t n = src_params.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (dst_params[i].name != src_params[i].name)
            throw std::invalid_argument("transfer_backbone: parameter order mismatch at " +
                                        dst_params[i].name);
        copy_tensor(dst_params[i].node->value, src_params[i].node->value);
    }
    std::vector<BufferRef> dst_buf, src_buf;
    pin.backbone.collect_buffers("b", dst_buf);
    const_cast<PgnModel&>(pgn).backbone.collect_buffers("b", src_buf);
    for (std::size_t i = 0; i < src_buf.size(); ++i) {
        if (dst_buf[i].name != src_buf[i].name)
            throw std::invalid_argument("transfer_backbone: buffer order mismatch");
        copy_tensor(*dst_buf[i].tensor, *src_buf[i].tensor);
    }
    pin.input_mean = pgn.input_mean;
    pin.input_std = pgn.input_std;
}

}  // namespace pgil
