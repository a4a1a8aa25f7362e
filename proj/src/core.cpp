// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/core.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace paro {

double to_double(const Quantity& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

std::string to_string(const Quantity& q) {
    if (q.denominator() == 1) {
        return std::to_string(q.numerator());
    }
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

char level_char(ShardLevel level) {
    switch (level) {
    case ShardLevel::NoShard: return 'N';
    case ShardLevel::IntraGroup: return 'I';
    case ShardLevel::Global: return 'G';
    }
    return '?';
}

std::string_view level_name(ShardLevel level) {
    switch (level) {
    case ShardLevel::NoShard: return "no-shard";
    case ShardLevel::IntraGroup: return "intra-group";
    case ShardLevel::Global: return "global";
    }
    return "unknown";
}

std::string Strategy::code() const {
    return {level_char(p), level_char(g), level_char(os)};
}

bool Strategy::uses_groups() const {
    return p == ShardLevel::IntraGroup || g == ShardLevel::IntraGroup || os == ShardLevel::IntraGroup;
}

Strategy parse_strategy(std::string_view code) {
    if (code.size() != 3) {
        throw ValidationError("strategy code must have 3 characters, got '" + std::string(code) + "'");
    }
    std::array<ShardLevel, 3> levels{};
    for (std::size_t i = 0; i < 3; ++i) {
        switch (code[i]) {
        case 'N': levels[i] = ShardLevel::NoShard; break;
        case 'I': levels[i] = ShardLevel::IntraGroup; break;
        case 'G': levels[i] = ShardLevel::Global; break;
        default:
            throw ValidationError(std::string("invalid shard level '") + code[i] + "' at position " +
                                  std::to_string(i + 1));
        }
    }
    return Strategy{levels[0], levels[1], levels[2]};
}

ClusterSpec validate_cluster(std::int64_t n_gpus, std::int64_t group_size, std::int64_t accum_steps) {
    if (n_gpus < 1) throw ValidationError("n_gpus must be >= 1");
    if (group_size < 1) throw ValidationError("group_size must be >= 1");
    if (accum_steps < 1) throw ValidationError("accum_steps must be >= 1");
    if (n_gpus % group_size != 0) throw ValidationError("group_size must divide n_gpus");
    return ClusterSpec{n_gpus, group_size, n_gpus / group_size, accum_steps};
}

std::string_view regime_name(Regime regime) {
    switch (regime) {
    case Regime::Full: return "full";
    case Regime::PartialLarge: return "partial-large";
    case Regime::PartialSmall: return "partial-small";
    case Regime::PEFT: return "peft";
    }
    return "unknown";
}

Regime parse_regime(std::string_view name) {
    for (Regime r : kAllRegimes) {
        if (regime_name(r) == name) return r;
    }
    throw ValidationError("unknown regime '" + std::string(name) +
                          "' (expected full, partial-large, partial-small or peft)");
}

Regime ModelSpec::regime() const {
    if (peft) return Regime::PEFT;
    if (trainable_params == total_params) return Regime::Full;
    // Psi' >= Psi/6 without leaving integers.
    if (6 * trainable_params >= total_params) return Regime::PartialLarge;
    return Regime::PartialSmall;
}

Quantity ModelSpec::layer_total(std::int64_t layer) const {
    if (!layer_params.empty()) return Quantity(layer_params.at(static_cast<std::size_t>(layer)));
    return Quantity(total_params, layers);
}

Quantity ModelSpec::layer_trainable(std::int64_t layer) const {
    if (total_params == 0) return Quantity(0);
    return layer_total(layer) * Quantity(trainable_params, total_params);
}

ModelSpec make_model(std::int64_t total_params, std::int64_t trainable_params, std::int64_t layers) {
    ModelSpec m;
    m.total_params = total_params;
    m.trainable_params = trainable_params;
    m.layers = layers;
    validate_model(m);
    return m;
}

void validate_model(const ModelSpec& model) {
    if (model.total_params < 0 || model.trainable_params < 0) throw ValidationError("parameter counts must be >= 0");
    if (model.trainable_params > model.total_params) throw ValidationError("trainable_params must not exceed total_params");
    if (model.param_bytes < 1 || model.grad_bytes < 1) throw ValidationError("byte widths must be >= 1");
    if (!(model.optim_factor > 0)) throw ValidationError("optim_factor must be > 0");
    if (model.layers < 1) throw ValidationError("layers must be >= 1");
    if (!model.layer_params.empty()) {
        if (static_cast<std::int64_t>(model.layer_params.size()) != model.layers) {
            throw ValidationError("layer_params must have one entry per layer");
        }
        if (std::accumulate(model.layer_params.begin(), model.layer_params.end(), std::int64_t{0}) != model.total_params) {
            throw ValidationError("layer_params must sum to total_params");
        }
    }
}

void validate_network(const NetworkSpec& net) {
    if (!(net.intra_bw > 0) || !(net.inter_bw > 0)) throw ValidationError("bandwidths must be > 0");
    if (net.intra_latency < 0 || net.inter_latency < 0) throw ValidationError("latencies must be >= 0");
}

std::int64_t parse_count(std::string_view text) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) return value;

    double d = 0;
    auto [dptr, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (dec != std::errc() || dptr != text.data() + text.size() || !std::isfinite(d)) {
        throw ValidationError("not a number: '" + std::string(text) + "'");
    }
    if (d != std::floor(d) || std::fabs(d) > 9.0e18) {
        throw ValidationError("not an integer count: '" + std::string(text) + "'");
    }
    return static_cast<std::int64_t>(d);
}

} // namespace paro
