#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fxlab/error.hpp"

namespace fxlab::lstm {

// Gate activations as the cell equations define them:
// sigma into (0,1), g into (-2,2), h into (-1,1), all monotone.
inline double act_sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double act_g(double x) { return 4.0 / (1.0 + std::exp(-x)) - 2.0; }
inline double act_h(double x) { return 2.0 / (1.0 + std::exp(-x)) - 1.0; }

/// All trainable parameters of a single-hidden-layer LSTM with element-wise
/// peephole connections and a scalar affine readout.
struct LstmParams {
    Eigen::Index input_dim = 0;
    Eigen::Index hidden_dim = 0;

    Eigen::MatrixXd W_xi, W_xf, W_xc, W_xo;  // m x d
    Eigen::MatrixXd W_hi, W_hf, W_hc, W_ho;  // m x m
    Eigen::VectorXd w_ci, w_cf, w_co;        // m (element-wise peepholes)
    Eigen::VectorXd b_i, b_f, b_c, b_o;      // m
    Eigen::RowVectorXd W_hy;                 // 1 x m
    double b_y = 0.0;

    // The printed cell equations feed c_{t-1} into the output gate; set this
    // to peek at c_t instead (the more common peephole variant).
    bool output_gate_uses_current_cell = false;

    LstmParams() = default;

    LstmParams(Eigen::Index d, Eigen::Index m) : input_dim(d), hidden_dim(m) {
        W_xi = W_xf = W_xc = W_xo = Eigen::MatrixXd::Zero(m, d);
        W_hi = W_hf = W_hc = W_ho = Eigen::MatrixXd::Zero(m, m);
        w_ci = w_cf = w_co = Eigen::VectorXd::Zero(m);
        b_i = b_f = b_c = b_o = Eigen::VectorXd::Zero(m);
        W_hy = Eigen::RowVectorXd::Zero(m);
    }

    /// Uniform(-1/sqrt(m), 1/sqrt(m)) weights, zero biases except the forget
    /// gate which starts at 1 so early gradients can flow.
    static LstmParams random(Eigen::Index d, Eigen::Index m, std::uint64_t seed) {
        LstmParams p(d, m);
        std::mt19937_64 rng(seed);
        const double bound = 1.0 / std::sqrt(static_cast<double>(m));
        std::uniform_real_distribution<double> u(-bound, bound);
        auto fill = [&](auto& mat) {
            for (Eigen::Index r = 0; r < mat.rows(); ++r)
                for (Eigen::Index c = 0; c < mat.cols(); ++c) mat(r, c) = u(rng);
        };
        fill(p.W_xi); fill(p.W_hi); fill(p.w_ci);
        fill(p.W_xf); fill(p.W_hf); fill(p.w_cf);
        fill(p.W_xc); fill(p.W_hc);
        fill(p.W_xo); fill(p.W_ho); fill(p.w_co);
        fill(p.W_hy);
        p.b_f.setOnes();
        return p;
    }
};

namespace detail_lstm {

template <typename Fn>
void for_each_block(LstmParams& p, Fn&& fn) {
    fn(p.W_xi); fn(p.W_hi); fn(p.w_ci); fn(p.b_i);
    fn(p.W_xf); fn(p.W_hf); fn(p.w_cf); fn(p.b_f);
    fn(p.W_xc); fn(p.W_hc); fn(p.b_c);
    fn(p.W_xo); fn(p.W_ho); fn(p.w_co); fn(p.b_o);
    fn(p.W_hy);
}

}  // namespace detail_lstm

/// Pack every parameter into one vector (fixed block order, b_y last).
inline Eigen::VectorXd flatten(const LstmParams& params) {
    std::vector<double> out;
    auto& p = const_cast<LstmParams&>(params);
    detail_lstm::for_each_block(p, [&](auto& block) {
        out.insert(out.end(), block.data(), block.data() + block.size());
    });
    out.push_back(params.b_y);
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline void unflatten(LstmParams& params, const Eigen::VectorXd& flat) {
    Eigen::Index at = 0;
    detail_lstm::for_each_block(params, [&](auto& block) {
        for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = flat(at++);
    });
    params.b_y = flat(at++);
    detail::require(at == flat.size(), ErrorKind::ShapeMismatch,
                    "flat vector does not match parameter count");
}

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zero(Eigen::Index m) {
        return {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
    }
};

/// Per-step activations kept for backprop.
struct StepCache {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd i, f, g, o, c, hc;  // hc = h(c)
};

struct CellOutput {
    LstmState state;
    Eigen::VectorXd input_gate, forget_gate, output_gate;
    StepCache cache;
};

/// One application of the composite cell function.
inline CellOutput cell_forward(const LstmParams& p, const Eigen::VectorXd& x,
                               const LstmState& prev) {
    detail::require(x.size() == p.input_dim, ErrorKind::DimensionMismatch,
                    "input size " + std::to_string(x.size()) + " != input_dim");
    detail::require(prev.h.size() == p.hidden_dim && prev.c.size() == p.hidden_dim,
                    ErrorKind::DimensionMismatch, "state size != hidden_dim");
    detail::require(prev.h.allFinite() && prev.c.allFinite(), ErrorKind::NonNumericCell,
                    "non-finite previous state");

    StepCache cc;
    cc.x = x;
    cc.h_prev = prev.h;
    cc.c_prev = prev.c;

    const Eigen::VectorXd a_i =
        p.W_xi * x + p.W_hi * prev.h + p.w_ci.cwiseProduct(prev.c) + p.b_i;
    const Eigen::VectorXd a_f =
        p.W_xf * x + p.W_hf * prev.h + p.w_cf.cwiseProduct(prev.c) + p.b_f;
    const Eigen::VectorXd a_g = p.W_xc * x + p.W_hc * prev.h + p.b_c;

    cc.i = a_i.unaryExpr([](double v) { return act_sigma(v); });
    cc.f = a_f.unaryExpr([](double v) { return act_sigma(v); });
    cc.g = a_g.unaryExpr([](double v) { return act_g(v); });
    cc.c = cc.f.cwiseProduct(prev.c) + cc.i.cwiseProduct(cc.g);

    const Eigen::VectorXd& o_peek = p.output_gate_uses_current_cell ? cc.c : cc.c_prev;
    const Eigen::VectorXd a_o =
        p.W_xo * x + p.W_ho * prev.h + p.w_co.cwiseProduct(o_peek) + p.b_o;
    cc.o = a_o.unaryExpr([](double v) { return act_sigma(v); });
    cc.hc = cc.c.unaryExpr([](double v) { return act_h(v); });

    CellOutput out;
    out.state.h = cc.o.cwiseProduct(cc.hc);
    out.state.c = cc.c;
    out.input_gate = cc.i;
    out.forget_gate = cc.f;
    out.output_gate = cc.o;
    out.cache = std::move(cc);
    return out;
}

/// Inputs x_1..x_T (previous scaled target stacked with previous-period
/// scaled deltas) and scalar targets y_1..y_T.
struct SupervisedSequence {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> targets;

    std::size_t length() const noexcept { return inputs.size(); }

    void validate() const {
        detail::require(!inputs.empty() && inputs.size() == targets.size(),
                        ErrorKind::ShapeMismatch, "need equally many inputs and targets, >= 1");
    }
};

struct ForwardResult {
    std::vector<double> predictions;
    double loss = 0.0;  // mean squared error
    std::vector<StepCache> caches;
};

/// Unroll from a zero state; loss is the MSE against the targets.
inline ForwardResult forward_sequence(const LstmParams& p, const SupervisedSequence& seq) {
    seq.validate();
    ForwardResult out;
    out.predictions.reserve(seq.length());
    out.caches.reserve(seq.length());
    LstmState state = LstmState::zero(p.hidden_dim);
    double sq_sum = 0.0;
    for (std::size_t t = 0; t < seq.length(); ++t) {
        CellOutput step = cell_forward(p, seq.inputs[t], state);
        state = step.state;
        const double y = p.W_hy.dot(state.h) + p.b_y;
        out.predictions.push_back(y);
        const double err = y - seq.targets[t];
        sq_sum += err * err;
        out.caches.push_back(std::move(step.cache));
    }
    out.loss = sq_sum / static_cast<double>(seq.length());
    return out;
}

/// Exact gradients of the sequence MSE via backpropagation through time,
/// peephole paths included. Returned in an LstmParams of the same shape.
inline LstmParams backward_sequence(const LstmParams& p, const SupervisedSequence& seq,
                                    const ForwardResult& forward) {
    seq.validate();
    detail::require(forward.caches.size() == seq.length() &&
                        forward.predictions.size() == seq.length(),
                    ErrorKind::ShapeMismatch, "caches do not match the sequence");

    const auto T = static_cast<std::ptrdiff_t>(seq.length());
    LstmParams grad(p.input_dim, p.hidden_dim);
    grad.output_gate_uses_current_cell = p.output_gate_uses_current_cell;

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(p.hidden_dim);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(p.hidden_dim);

    for (std::ptrdiff_t t = T - 1; t >= 0; --t) {
        const StepCache& cc = forward.caches[static_cast<std::size_t>(t)];
        const double dy = 2.0 *
                          (forward.predictions[static_cast<std::size_t>(t)] -
                           seq.targets[static_cast<std::size_t>(t)]) /
                          static_cast<double>(T);

        const Eigen::VectorXd h_t = cc.o.cwiseProduct(cc.hc);
        grad.W_hy += dy * h_t.transpose();
        grad.b_y += dy;

        const Eigen::VectorXd dh = p.W_hy.transpose() * dy + dh_next;

        // h_t = o ⊙ h(c); h'(c) = (1 - h(c)^2)/2, sigma' = s(1-s), g' = (4-g^2)/4.
        const Eigen::VectorXd d_o = dh.cwiseProduct(cc.hc);
        const Eigen::VectorXd da_o =
            d_o.cwiseProduct(cc.o.cwiseProduct(Eigen::VectorXd::Ones(p.hidden_dim) - cc.o));

        Eigen::VectorXd dc =
            dh.cwiseProduct(cc.o)
                .cwiseProduct((Eigen::VectorXd::Ones(p.hidden_dim) -
                               cc.hc.cwiseProduct(cc.hc)) *
                              0.5) +
            dc_next;
        if (p.output_gate_uses_current_cell) dc += da_o.cwiseProduct(p.w_co);

        const Eigen::VectorXd d_f = dc.cwiseProduct(cc.c_prev);
        const Eigen::VectorXd d_i = dc.cwiseProduct(cc.g);
        const Eigen::VectorXd d_g = dc.cwiseProduct(cc.i);
        const Eigen::VectorXd da_f =
            d_f.cwiseProduct(cc.f.cwiseProduct(Eigen::VectorXd::Ones(p.hidden_dim) - cc.f));
        const Eigen::VectorXd da_i =
            d_i.cwiseProduct(cc.i.cwiseProduct(Eigen::VectorXd::Ones(p.hidden_dim) - cc.i));
        const Eigen::VectorXd da_g =
            d_g.cwiseProduct((4.0 - cc.g.array().square()).matrix() * 0.25);

        grad.W_xi += da_i * cc.x.transpose();
        grad.W_hi += da_i * cc.h_prev.transpose();
        grad.w_ci += da_i.cwiseProduct(cc.c_prev);
        grad.b_i += da_i;

        grad.W_xf += da_f * cc.x.transpose();
        grad.W_hf += da_f * cc.h_prev.transpose();
        grad.w_cf += da_f.cwiseProduct(cc.c_prev);
        grad.b_f += da_f;

        grad.W_xc += da_g * cc.x.transpose();
        grad.W_hc += da_g * cc.h_prev.transpose();
        grad.b_c += da_g;

        grad.W_xo += da_o * cc.x.transpose();
        grad.W_ho += da_o * cc.h_prev.transpose();
        grad.w_co += da_o.cwiseProduct(p.output_gate_uses_current_cell ? cc.c : cc.c_prev);
        grad.b_o += da_o;

        dh_next = p.W_hi.transpose() * da_i + p.W_hf.transpose() * da_f +
                  p.W_hc.transpose() * da_g + p.W_ho.transpose() * da_o;
        dc_next = dc.cwiseProduct(cc.f) + da_i.cwiseProduct(p.w_ci) +
                  da_f.cwiseProduct(p.w_cf);
        if (!p.output_gate_uses_current_cell) dc_next += da_o.cwiseProduct(p.w_co);
    }
    return grad;
}

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 500;
    double clip_norm = 5.0;
    std::uint64_t seed = 42;
    std::size_t patience = 50;

    void validate() const {
        detail::require(learning_rate >= 0.0, ErrorKind::ConfigError,
                        "learning_rate must be >= 0");
        detail::require(epochs >= 1, ErrorKind::ConfigError, "epochs must be >= 1");
        detail::require(clip_norm > 0.0, ErrorKind::ConfigError, "clip_norm must be positive");
        detail::require(patience >= 1, ErrorKind::ConfigError, "patience must be >= 1");
    }
};

struct EpochLoss {
    double train = 0.0;
    double val = 0.0;
};

struct TrainResult {
    LstmParams params;  // best-validation parameters
    std::vector<EpochLoss> history;
};

/// Full-batch gradient descent with global-norm clipping. Losses are recorded
/// at the start of every epoch (before that epoch's update); training stops at
/// `epochs` or once validation loss has not improved for `patience` epochs,
/// and the parameters with the best validation loss are returned.
inline TrainResult train(LstmParams params, const SupervisedSequence& train_seq,
                         const SupervisedSequence& val_seq, const TrainConfig& config) {
    config.validate();
    train_seq.validate();
    val_seq.validate();

    TrainResult result;
    LstmParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const ForwardResult fwd = forward_sequence(params, train_seq);
        const double val_loss = forward_sequence(params, val_seq).loss;
        detail::require(std::isfinite(fwd.loss) && std::isfinite(val_loss),
                        ErrorKind::NonFiniteLoss,
                        "loss diverged at epoch " + std::to_string(epoch + 1));
        result.history.push_back({fwd.loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }

        LstmParams grad = backward_sequence(params, train_seq, fwd);
        Eigen::VectorXd g = flatten(grad);
        const double norm = g.norm();
        if (norm > config.clip_norm) g *= config.clip_norm / norm;
        Eigen::VectorXd w = flatten(params);
        w -= config.learning_rate * g;
        unflatten(params, w);
    }
    result.params = best;
    return result;
}

}  // namespace fxlab::lstm
