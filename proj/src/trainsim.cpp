// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/trainsim.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include "paro/netsim.hpp"
#include "paro/schedule.hpp"

namespace paro {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t layer_size(const std::vector<std::int64_t>& dims, std::int64_t l) {
    const auto i = static_cast<std::size_t>(l);
    return dims[i + 1] * dims[i] + dims[i + 1];
}

// Per-sample activations: acts[l] is the input of layer l, acts[L] the output.
using Activations = std::vector<std::vector<std::vector<double>>>;

void forward_layer(const std::vector<std::int64_t>& dims, std::int64_t l, const double* w,
                   const std::vector<std::vector<double>>& in, std::vector<std::vector<double>>& out) {
    const std::int64_t n_in = dims[static_cast<std::size_t>(l)];
    const std::int64_t n_out = dims[static_cast<std::size_t>(l) + 1];
    const bool hidden = l + 2 < static_cast<std::int64_t>(dims.size());
    const double* b = w + n_out * n_in;
    out.assign(in.size(), std::vector<double>(static_cast<std::size_t>(n_out)));
    for (std::size_t s = 0; s < in.size(); ++s) {
        for (std::int64_t o = 0; o < n_out; ++o) {
            double z = b[o];
            for (std::int64_t i = 0; i < n_in; ++i) z += w[o * n_in + i] * in[s][static_cast<std::size_t>(i)];
            out[s][static_cast<std::size_t>(o)] = hidden ? std::tanh(z) : z;
        }
    }
}

// d_out holds dL/d(output of layer l) per sample and is replaced by dL/d(input).
void backward_layer(const std::vector<std::int64_t>& dims, std::int64_t l, const double* w,
                    const std::vector<std::vector<double>>& in, const std::vector<std::vector<double>>& out,
                    std::vector<std::vector<double>>& d_out, double* grad) {
    const std::int64_t n_in = dims[static_cast<std::size_t>(l)];
    const std::int64_t n_out = dims[static_cast<std::size_t>(l) + 1];
    const bool hidden = l + 2 < static_cast<std::int64_t>(dims.size());
    double* gb = grad + n_out * n_in;
    std::vector<std::vector<double>> d_in(in.size(), std::vector<double>(static_cast<std::size_t>(n_in), 0.0));
    for (std::size_t s = 0; s < in.size(); ++s) {
        for (std::int64_t o = 0; o < n_out; ++o) {
            const double a = out[s][static_cast<std::size_t>(o)];
            const double delta = d_out[s][static_cast<std::size_t>(o)] * (hidden ? 1.0 - a * a : 1.0);
            gb[o] += delta;
            for (std::int64_t i = 0; i < n_in; ++i) {
                grad[o * n_in + i] += delta * in[s][static_cast<std::size_t>(i)];
                d_in[s][static_cast<std::size_t>(i)] += w[o * n_in + i] * delta;
            }
        }
    }
    d_out = std::move(d_in);
}

// Loss of the batch, and dL/d(output) into d_out.
double loss_grad(const std::vector<std::vector<double>>& pred, const std::vector<Sample>& batch,
                 std::vector<std::vector<double>>& d_out) {
    double loss = 0;
    d_out.assign(pred.size(), {});
    for (std::size_t s = 0; s < pred.size(); ++s) {
        d_out[s].resize(pred[s].size());
        for (std::size_t k = 0; k < pred[s].size(); ++k) {
            const double r = pred[s][k] - batch[s].y[k];
            loss += 0.5 * r * r;
            d_out[s][k] = r;
        }
    }
    return loss;
}

std::vector<std::vector<double>> inputs_of(const std::vector<Sample>& batch) {
    std::vector<std::vector<double>> xs;
    xs.reserve(batch.size());
    for (const Sample& s : batch) xs.push_back(s.x);
    return xs;
}

void adam_step(double& p, double& m, double& v, double g, std::int64_t t, const AdamConfig& a) {
    m = a.beta1 * m + (1.0 - a.beta1) * g;
    v = a.beta2 * v + (1.0 - a.beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(a.beta1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(a.beta2, static_cast<double>(t)));
    p -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
}

std::int64_t global_batch(const TrainConfig& cfg) {
    return cfg.cluster.n_gpus * cfg.cluster.accum_steps * cfg.samples_per_rank;
}

// Per-element record of which ranks' micro-batch gradients were summed into it.
struct Counter {
    std::vector<std::int32_t> counts;

    Counter& operator+=(const Counter& o) {
        if (o.counts.empty()) return *this;
        if (counts.empty()) counts.assign(o.counts.size(), 0);
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        return *this;
    }
};

template <class T>
T released();
template <>
double released<double>() {
    return std::numeric_limits<double>::quiet_NaN();
}
template <>
Counter released<Counter>() {
    return Counter{};
}

template <class T>
using RankBuffers = std::vector<std::vector<T>>;

// Distributed execution of one scheme on the simulated cluster.
class Trainer {
public:
    Trainer(const Scheme& scheme, const TinyModel& model, const TrainConfig& cfg)
        : model_(model), cfg_(cfg), cluster_(cfg.cluster), plan_(generate(scheme, cfg.cluster, model.spec())),
          st_(plan_.strategy), n_(cfg.cluster.n_gpus), layers_(model.n_layers()) {
        for (const CommOp& op : plan_.ops) {
            ops_[key(op.stage, op.layer.value_or(-1), op.micro_batch.value_or(-1), op.target)].push_back(op);
        }
        for (std::int64_t l = 0; l < layers_; ++l) {
            const std::int64_t size = layer_size(model.dims, l);
            const std::int64_t padded = (size + n_ - 1) / n_ * n_;
            padded_.push_back(padded);
            std::vector<double> init(static_cast<std::size_t>(padded), 0.0);
            std::copy(model.params[static_cast<std::size_t>(l)].begin(), model.params[static_cast<std::size_t>(l)].end(),
                      init.begin());
            params_.push_back(masked(RankBuffers<double>(static_cast<std::size_t>(n_), init), st_.p, l));
            master_.push_back(masked(RankBuffers<double>(static_cast<std::size_t>(n_), init), st_.os, l));
            const std::vector<double> zeros(static_cast<std::size_t>(padded), 0.0);
            m_.push_back(masked(RankBuffers<double>(static_cast<std::size_t>(n_), zeros), st_.os, l));
            v_.push_back(m_.back());
            secondary_.emplace_back();
        }
    }

    StrategyRun run() {
        for (std::int64_t step = 0; step < cfg_.steps && run_.failure.empty(); ++step) train_step(step);
        if (run_.failure.empty()) {
            for (std::int64_t l = 0; l < layers_; ++l) {
                const auto full = gather_params(Stage::Forward, l, 0);
                const auto& r0 = full[0];
                run_.params.emplace_back(r0.begin(), r0.begin() + layer_size(model_.dims, l));
            }
        }
        return run_;
    }

private:
    using Key = std::tuple<int, std::int64_t, std::int64_t, int>;
    static Key key(Stage s, std::int64_t layer, std::int64_t mb, Target t) {
        return {static_cast<int>(s), layer, mb, static_cast<int>(t)};
    }
    const std::vector<CommOp>& ops(Stage s, std::int64_t layer, std::int64_t mb, Target t) const {
        static const std::vector<CommOp> none;
        auto it = ops_.find(key(s, layer, mb, t));
        return it == ops_.end() ? none : it->second;
    }

    std::int64_t seg(std::int64_t l) const { return padded_[static_cast<std::size_t>(l)] / n_; }

    // Residencies that coincide on this cluster shape compare equal.
    ShardLevel canonical(ShardLevel level) const {
        if (n_ == 1) return ShardLevel::NoShard;
        if (level == ShardLevel::IntraGroup && cluster_.group_size() == 1) return ShardLevel::NoShard;
        if (level == ShardLevel::IntraGroup && cluster_.n_groups() == 1) return ShardLevel::Global;
        return level;
    }

    // Whether data at `have` covers every segment `need` declares, on every rank.
    bool covers(ShardLevel have, ShardLevel need) const {
        for (std::int64_t r = 0; r < n_; ++r) {
            const auto mask = resident_mask(have, r);
            for (std::int64_t s : resident_segments(need, cluster_, r)) {
                if (!mask[static_cast<std::size_t>(s)]) return false;
            }
        }
        return true;
    }

    std::vector<bool> resident_mask(ShardLevel level, std::int64_t rank) const {
        std::vector<bool> mask(static_cast<std::size_t>(n_), false);
        for (std::int64_t s : resident_segments(level, cluster_, rank)) mask[static_cast<std::size_t>(s)] = true;
        return mask;
    }

    template <class T>
    RankBuffers<T> masked(RankBuffers<T> bufs, ShardLevel level, std::int64_t l) const {
        const std::int64_t c = seg(l);
        for (std::int64_t r = 0; r < n_; ++r) {
            const auto mask = resident_mask(level, r);
            auto& b = bufs[static_cast<std::size_t>(r)];
            for (std::int64_t s = 0; s < n_; ++s) {
                if (mask[static_cast<std::size_t>(s)]) continue;
                std::fill(b.begin() + s * c, b.begin() + (s + 1) * c, released<T>());
            }
        }
        return bufs;
    }

    // Runs ops on the buffers, releasing whatever falls outside the new residency.
    template <class T>
    ShardLevel apply(const std::vector<CommOp>& list, ShardLevel level, RankBuffers<T>& bufs, std::int64_t l,
                     bool count) {
        for (const CommOp& op : list) {
            const ShardLevel need = input_residency(op.kind, op.scope);
            if (canonical(need) != canonical(level)) {
                throw std::logic_error(std::string(op_kind_name(op.kind)) + " over " + std::string(scope_name(op.scope)) +
                                       " found the buffer at " + std::string(level_name(level)) + " residency");
            }
            run_schedule(cluster_, op_schedule(op.kind, op.scope, cluster_, seg(l)), bufs, 8.0, NetworkSpec{});
            if (count) ++run_.collectives;
            level = residency_after(op.kind, op.scope, need);
            bufs = masked(std::move(bufs), level, l);
        }
        return level;
    }

    void fail(const std::string& why) {
        if (run_.failure.empty()) run_.failure = why;
    }

    ShardLevel secondary_level() const {
        return cluster_.n_groups() == 1 ? ShardLevel::Global : ShardLevel::IntraGroup;
    }

    RankBuffers<double> gather_params(Stage stage, std::int64_t l, std::int64_t mb) {
        const bool from_secondary = stage == Stage::Backward && plan_.scheme.secondary_param_shard &&
                                    st_.p == ShardLevel::Global;
        RankBuffers<double> bufs = from_secondary ? secondary_[static_cast<std::size_t>(l)]
                                                  : params_[static_cast<std::size_t>(l)];
        const ShardLevel start = from_secondary ? secondary_level() : st_.p;
        const ShardLevel level = apply(ops(stage, l, mb, Target::P), start, bufs, l, true);
        if (canonical(level) != ShardLevel::NoShard) {
            fail("parameter gather of layer " + std::to_string(l) + " ended at " + std::string(level_name(level)) +
                 " residency");
        }
        for (const auto& b : bufs) {
            if (std::any_of(b.begin(), b.end(), [](double x) { return std::isnan(x); })) {
                fail("parameter gather of layer " + std::to_string(l) + " left released elements");
                break;
            }
        }
        if (stage == Stage::Forward && plan_.scheme.secondary_param_shard) {
            secondary_[static_cast<std::size_t>(l)] = masked(bufs, secondary_level(), l);
        }
        return bufs;
    }

    void train_step(std::int64_t step) {
        const std::int64_t s = cfg_.cluster.accum_steps;
        std::vector<RankBuffers<double>> acc;
        std::vector<RankBuffers<Counter>> acc_count;
        for (std::int64_t l = 0; l < layers_; ++l) {
            const auto len = static_cast<std::size_t>(padded_[static_cast<std::size_t>(l)]);
            acc.push_back(masked(RankBuffers<double>(static_cast<std::size_t>(n_), std::vector<double>(len, 0.0)),
                                 st_.g, l));
            acc_count.push_back(masked(RankBuffers<Counter>(static_cast<std::size_t>(n_), std::vector<Counter>(len)),
                                       st_.g, l));
        }

        for (std::int64_t mb = 0; mb < s; ++mb) {
            std::vector<std::vector<Sample>> batch(static_cast<std::size_t>(n_));
            std::vector<Activations> acts(static_cast<std::size_t>(n_), Activations(static_cast<std::size_t>(layers_ + 1)));
            for (std::int64_t r = 0; r < n_; ++r) {
                for (std::int64_t t = 0; t < cfg_.samples_per_rank; ++t) {
                    batch[static_cast<std::size_t>(r)].push_back(
                        make_sample(model_.dims, cfg_.seed, sample_index(cfg_, step, mb, r, t)));
                }
                acts[static_cast<std::size_t>(r)][0] = inputs_of(batch[static_cast<std::size_t>(r)]);
            }
            for (std::int64_t l = 0; l < layers_; ++l) {
                const auto full = gather_params(Stage::Forward, l, mb);
                for (std::int64_t r = 0; r < n_; ++r) {
                    auto& a = acts[static_cast<std::size_t>(r)];
                    forward_layer(model_.dims, l, full[static_cast<std::size_t>(r)].data(), a[static_cast<std::size_t>(l)],
                                  a[static_cast<std::size_t>(l) + 1]);
                }
            }
            std::vector<std::vector<std::vector<double>>> d(static_cast<std::size_t>(n_));
            for (std::int64_t r = 0; r < n_; ++r) {
                loss_grad(acts[static_cast<std::size_t>(r)].back(), batch[static_cast<std::size_t>(r)],
                          d[static_cast<std::size_t>(r)]);
            }
            for (std::int64_t l = layers_ - 1; l >= 0; --l) {
                const auto full = gather_params(Stage::Backward, l, mb);
                const auto len = static_cast<std::size_t>(padded_[static_cast<std::size_t>(l)]);
                RankBuffers<double> grads(static_cast<std::size_t>(n_), std::vector<double>(len, 0.0));
                RankBuffers<Counter> counts(static_cast<std::size_t>(n_));
                for (std::int64_t r = 0; r < n_; ++r) {
                    const auto& a = acts[static_cast<std::size_t>(r)];
                    backward_layer(model_.dims, l, full[static_cast<std::size_t>(r)].data(), a[static_cast<std::size_t>(l)],
                                   a[static_cast<std::size_t>(l) + 1], d[static_cast<std::size_t>(r)],
                                   grads[static_cast<std::size_t>(r)].data());
                    Counter mine;
                    mine.counts.assign(static_cast<std::size_t>(n_), 0);
                    mine.counts[static_cast<std::size_t>(r)] = 1;
                    counts[static_cast<std::size_t>(r)].assign(len, mine);
                }
                const auto& list = ops(Stage::Backward, l, mb, Target::G);
                const ShardLevel level = apply(list, ShardLevel::NoShard, grads, l, true);
                apply(list, ShardLevel::NoShard, counts, l, false);
                if (canonical(level) != canonical(st_.g)) {
                    fail("gradient reduction of layer " + std::to_string(l) + " ended at " +
                         std::string(level_name(level)) + " residency");
                    return;
                }
                const auto mask_level = st_.g;
                for (std::int64_t r = 0; r < n_; ++r) {
                    const auto mask = resident_mask(mask_level, r);
                    for (std::size_t e = 0; e < len; ++e) {
                        if (!mask[e / static_cast<std::size_t>(seg(l))]) continue;
                        acc[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)][e] +=
                            grads[static_cast<std::size_t>(r)][e];
                        acc_count[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)][e] +=
                            counts[static_cast<std::size_t>(r)][e];
                    }
                }
            }
        }

        const double inv_batch = 1.0 / static_cast<double>(global_batch(cfg_));
        const std::int64_t t = step + 1;
        for (std::int64_t l = 0; l < layers_; ++l) {
            auto& grads = acc[static_cast<std::size_t>(l)];
            auto& counts = acc_count[static_cast<std::size_t>(l)];
            const auto& list = ops(Stage::Update, l, -1, Target::G);
            const ShardLevel level = apply(list, st_.g, grads, l, true);
            apply(list, st_.g, counts, l, false);
            if (!covers(level, st_.os)) {
                fail("gradient reconciliation of layer " + std::to_string(l) + " ended at " +
                     std::string(level_name(level)) + " residency");
                return;
            }
            const auto len = static_cast<std::size_t>(padded_[static_cast<std::size_t>(l)]);
            for (std::int64_t r = 0; r < n_; ++r) {
                const auto mask = resident_mask(st_.os, r);
                auto& p = master_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
                auto& m = m_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
                auto& v = v_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
                for (std::size_t e = 0; e < len; ++e) {
                    if (!mask[e / static_cast<std::size_t>(seg(l))]) continue;
                    const Counter& c = counts[static_cast<std::size_t>(r)][e];
                    const bool exact = c.counts.size() == static_cast<std::size_t>(n_) &&
                                       std::all_of(c.counts.begin(), c.counts.end(),
                                                   [&](std::int32_t k) { return k == cfg_.cluster.accum_steps; });
                    if (!exact && run_.reduction_counts_ok) {
                        run_.reduction_counts_ok = false;
                        fail("gradient element " + std::to_string(e) + " of layer " + std::to_string(l) + " on rank " +
                             std::to_string(r) + " was not reduced exactly once per micro-batch from every rank");
                    }
                    adam_step(p[e], m[e], v[e], grads[static_cast<std::size_t>(r)][e] * inv_batch, t, cfg_.adam);
                }
            }
            restore_params(l);
        }
    }

    void restore_params(std::int64_t l) {
        RankBuffers<double> bufs = master_[static_cast<std::size_t>(l)];
        const ShardLevel level = apply(ops(Stage::Update, l, -1, Target::P), st_.os, bufs, l, true);
        if (!covers(level, st_.p)) {
            run_.residency_ok = false;
            fail("parameter restore of layer " + std::to_string(l) + " ended at " + std::string(level_name(level)) +
                 " residency");
            return;
        }
        // Every declared shard must hold the optimizer's value.
        const std::int64_t c = seg(l);
        for (std::int64_t r = 0; r < n_; ++r) {
            for (std::int64_t sgm : resident_segments(st_.p, cluster_, r)) {
                const std::int64_t owner = owner_of(sgm);
                for (std::int64_t e = sgm * c; e < (sgm + 1) * c; ++e) {
                    const double got = bufs[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)];
                    const double want =
                        master_[static_cast<std::size_t>(l)][static_cast<std::size_t>(owner)][static_cast<std::size_t>(e)];
                    if (std::memcmp(&got, &want, sizeof(double)) != 0) {
                        run_.residency_ok = false;
                        fail("rank " + std::to_string(r) + " does not hold its declared parameter shard of layer " +
                             std::to_string(l));
                        return;
                    }
                }
            }
        }
        params_[static_cast<std::size_t>(l)] = masked(std::move(bufs), st_.p, l);
    }

    // Some rank holding the segment at optimizer residency.
    std::int64_t owner_of(std::int64_t segment) const {
        for (std::int64_t r = 0; r < n_; ++r) {
            const auto segs = resident_segments(st_.os, cluster_, r);
            if (std::find(segs.begin(), segs.end(), segment) != segs.end()) return r;
        }
        return 0;
    }

    const TinyModel& model_;
    const TrainConfig& cfg_;
    SimCluster cluster_;
    SchedulePlan plan_;
    Strategy st_;
    std::int64_t n_;
    std::int64_t layers_;
    std::map<Key, std::vector<CommOp>> ops_;
    std::vector<std::int64_t> padded_;
    std::vector<RankBuffers<double>> params_;
    std::vector<RankBuffers<double>> secondary_;
    std::vector<RankBuffers<double>> master_;
    std::vector<RankBuffers<double>> m_;
    std::vector<RankBuffers<double>> v_;
    StrategyRun run_;
};

} // namespace

std::vector<std::int64_t> default_dims() { return {6, 16, 16, 2}; }

TinyModel TinyModel::make(std::vector<std::int64_t> dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ValidationError("a model needs at least an input and an output width");
    for (std::int64_t d : dims) {
        if (d < 1) throw ValidationError("layer widths must be positive");
    }
    TinyModel m;
    m.dims = std::move(dims);
    std::mt19937_64 rng(seed);
    for (std::int64_t l = 0; l + 1 < static_cast<std::int64_t>(m.dims.size()); ++l) {
        const std::int64_t n_in = m.dims[static_cast<std::size_t>(l)];
        const std::int64_t n_out = m.dims[static_cast<std::size_t>(l) + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
        std::vector<double> p(static_cast<std::size_t>(layer_size(m.dims, l)));
        for (std::int64_t i = 0; i < n_out * n_in; ++i) p[static_cast<std::size_t>(i)] = (2.0 * unit(rng) - 1.0) * scale;
        for (std::int64_t o = 0; o < n_out; ++o) p[static_cast<std::size_t>(n_out * n_in + o)] = 0.1 * (2.0 * unit(rng) - 1.0);
        m.params.push_back(std::move(p));
    }
    if (m.param_count() > 10000) throw ValidationError("tiny model is limited to 10000 parameters");
    return m;
}

std::int64_t TinyModel::param_count() const {
    std::int64_t n = 0;
    for (const auto& p : params) n += static_cast<std::int64_t>(p.size());
    return n;
}

ModelSpec TinyModel::spec() const {
    ModelSpec s;
    s.total_params = param_count();
    s.trainable_params = s.total_params;
    s.param_bytes = 8;
    s.grad_bytes = 8;
    s.optim_factor = 24.0;
    s.layers = n_layers();
    for (const auto& p : params) s.layer_params.push_back(static_cast<std::int64_t>(p.size()));
    validate_model(s);
    return s;
}

Sample make_sample(const std::vector<std::int64_t>& dims, std::uint64_t seed, std::int64_t index) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1)));
    Sample s;
    const std::int64_t n_in = dims.front();
    const std::int64_t n_out = dims.back();
    for (std::int64_t i = 0; i < n_in; ++i) s.x.push_back(2.0 * unit(rng) - 1.0);
    for (std::int64_t k = 0; k < n_out; ++k) {
        double z = 0;
        for (std::int64_t i = 0; i < n_in; ++i) {
            z += static_cast<double>((k + 1) * (i + 1) % 7 - 3) / 4.0 * s.x[static_cast<std::size_t>(i)];
        }
        s.y.push_back(std::sin(z) + 0.05 * (2.0 * unit(rng) - 1.0));
    }
    return s;
}

std::int64_t sample_index(const TrainConfig& cfg, std::int64_t step, std::int64_t mb, std::int64_t rank,
                          std::int64_t t) {
    return step * global_batch(cfg) + (mb * cfg.cluster.n_gpus + rank) * cfg.samples_per_rank + t;
}

double accumulate_gradients(const std::vector<std::int64_t>& dims, const std::vector<std::vector<double>>& params,
                            const std::vector<Sample>& batch, std::vector<std::vector<double>>& grads) {
    const auto layers = static_cast<std::int64_t>(params.size());
    Activations acts(static_cast<std::size_t>(layers + 1));
    acts[0] = inputs_of(batch);
    for (std::int64_t l = 0; l < layers; ++l) {
        forward_layer(dims, l, params[static_cast<std::size_t>(l)].data(), acts[static_cast<std::size_t>(l)],
                      acts[static_cast<std::size_t>(l) + 1]);
    }
    std::vector<std::vector<double>> d;
    const double loss = loss_grad(acts.back(), batch, d);
    for (std::int64_t l = layers - 1; l >= 0; --l) {
        backward_layer(dims, l, params[static_cast<std::size_t>(l)].data(), acts[static_cast<std::size_t>(l)],
                       acts[static_cast<std::size_t>(l) + 1], d, grads[static_cast<std::size_t>(l)].data());
    }
    return loss;
}

Snapshot run_baseline(const TinyModel& model, const TrainConfig& cfg) {
    validate_cluster(cfg.cluster.n_gpus, cfg.cluster.group_size, cfg.cluster.accum_steps);
    Snapshot p = model.params;
    Snapshot m, v;
    for (const auto& layer : p) {
        m.emplace_back(layer.size(), 0.0);
        v.emplace_back(layer.size(), 0.0);
    }
    const double inv_batch = 1.0 / static_cast<double>(global_batch(cfg));
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        Snapshot grads;
        for (const auto& layer : p) grads.emplace_back(layer.size(), 0.0);
        for (std::int64_t mb = 0; mb < cfg.cluster.accum_steps; ++mb) {
            std::vector<Sample> batch;
            for (std::int64_t r = 0; r < cfg.cluster.n_gpus; ++r) {
                for (std::int64_t t = 0; t < cfg.samples_per_rank; ++t) {
                    batch.push_back(make_sample(model.dims, cfg.seed, sample_index(cfg, step, mb, r, t)));
                }
            }
            accumulate_gradients(model.dims, p, batch, grads);
        }
        for (std::size_t l = 0; l < p.size(); ++l) {
            for (std::size_t e = 0; e < p[l].size(); ++e) {
                adam_step(p[l][e], m[l][e], v[l][e], grads[l][e] * inv_batch, step + 1, cfg.adam);
            }
        }
    }
    return p;
}

StrategyRun run_strategy(const Scheme& scheme, const TinyModel& model, const TrainConfig& cfg) {
    if (cfg.steps < 0 || cfg.samples_per_rank < 1) throw ValidationError("steps and samples per rank must be positive");
    validate_cluster(cfg.cluster.n_gpus, cfg.cluster.group_size, cfg.cluster.accum_steps);
    Trainer trainer(scheme, model, cfg);
    return trainer.run();
}

double max_abs_diff(const Snapshot& a, const Snapshot& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        if (a[l].size() != b[l].size()) return std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < a[l].size(); ++e) {
            const double d = std::fabs(a[l][e] - b[l][e]);
            if (std::isnan(d)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, d);
        }
    }
    return worst;
}

std::uint64_t snapshot_hash(const Snapshot& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& layer : s) {
        for (double x : layer) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &x, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return h;
}

} // namespace paro
