#include "fbq/trainsim.hpp"

#include <cmath>
#include <stdexcept>

#include "fbq/rng.hpp"

namespace fbq {

namespace {

// seed tags for the per-layer stochastic sub-streams
constexpr std::uint64_t kTagContext = 0;
constexpr std::uint64_t kTagGradY = 1;

std::uint64_t layer_seed(const QuantConfig& cfg, int layer_id, std::uint64_t tag, int step) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(layer_id) * 4 + tag,
                       static_cast<std::uint64_t>(step));
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    std::vector<float> out(a.values());
    for (index_t i = 0; i < a.size(); ++i) out[i] += b.data()[i];
    return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

DenseMatrix random_weight(index_t rows, index_t cols, float std_dev, std::uint64_t seed) {
    DeterministicRng rng(seed);
    std::vector<float> w(static_cast<std::size_t>(rows * cols));
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std_dev * rng.normal_at(i);
    }
    return DenseMatrix(rows, cols, std::move(w));
}

} // namespace

float silu_scalar(float x) {
    return static_cast<float>(static_cast<double>(x) /
                              (1.0 + std::exp(-static_cast<double>(x))));
}

float silu_grad_scalar(float x) {
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(x)));
    return static_cast<float>(s * (1.0 + static_cast<double>(x) * (1.0 - s)));
}

// ---------------------------------------------------------------------------
// QuantLinearLayer

QuantLinearLayer::QuantLinearLayer(std::string name, int layer_id, DenseMatrix weight,
                                   QuantConfig cfg)
    : name_(std::move(name)),
      layer_id_(layer_id),
      cfg_(std::move(cfg)),
      weight_(std::move(weight)),
      grad_w_(weight_.rows(), weight_.cols()) {
    threshold_state_.threshold = cfg_.threshold_init;
}

DenseMatrix QuantLinearLayer::forward(const DenseMatrix& x, int step) {
    if (x.cols() != weight_.cols()) {
        throw std::invalid_argument(name_ + ": input width does not match the weight");
    }
    ctx_x_q_.reset();
    ctx_x_fp_.reset();

    if (cfg_.passthrough) {
        DenseMatrix y = gemm_oracle(x, fbq::transpose(weight_));
        ctx_x_fp_ = x;
        last_rate_ = 0.0;
        return y;
    }

    const GroupGeometry g(cfg_.block, cfg_.block);
    const GemmBlockShape shape(cfg_.block, cfg_.block, cfg_.block);
    const BitWidth bx(cfg_.bits_x);

    std::vector<std::uint8_t> mask;
    switch (cfg_.fallback_mode) {
        case FallbackMode::Threshold:
            mask = mask_threshold(score_blocks(x, g, bx, FallbackCriterion::AbsMax),
                                  threshold_state_.threshold);
            break;
        case FallbackMode::FixedRate:
            mask = mask_topk(score_blocks(x, g, bx, FallbackCriterion::AbsMax), cfg_.fixed_rate);
            break;
        case FallbackMode::Off:
            mask.assign(static_cast<std::size_t>(grid_rows(x.rows(), g) * grid_cols(x.cols(), g)),
                        0);
            break;
    }
    last_rate_ = mask_rate(mask);

    const FallbackTensor fa = fallback_quantize(x, g, bx, mask);
    const QuantizedTensor wq =
        quantize_rtn(fbq::transpose(weight_), g, BitWidth(cfg_.bits_w));
    DenseMatrix y = fallback_gemm(fa, wq, shape);

    ctx_x_q_ = quantize_stochastic(
        x, g, BitWidth(cfg_.context_bits),
        DeterministicRng(layer_seed(cfg_, layer_id_, kTagContext, step)));
    return y;
}

DenseMatrix QuantLinearLayer::backward(const DenseMatrix& grad_y, int step) {
    if (cfg_.passthrough) {
        if (!ctx_x_fp_.has_value()) throw std::logic_error(name_ + ": backward without context");
        grad_w_ = add(grad_w_, gemm_oracle(fbq::transpose(grad_y), *ctx_x_fp_));
        return gemm_oracle(grad_y, weight_);
    }
    if (!ctx_x_q_.has_value()) throw std::logic_error(name_ + ": backward without context");

    const GroupGeometry g(cfg_.block, cfg_.block);
    const GemmBlockShape shape(cfg_.block, cfg_.block, cfg_.block);

    const QuantizedTensor gyq = quantize_stochastic(
        grad_y, g, BitWidth(cfg_.bits_grad),
        DeterministicRng(layer_seed(cfg_, layer_id_, kTagGradY, step)));

    const QuantizedTensor wq = quantize_rtn(weight_, g, BitWidth(cfg_.bits_w));
    DenseMatrix grad_x = block_quant_gemm(gyq, wq, shape);

    const DenseMatrix gw = block_quant_gemm(fbq::transpose(gyq), *ctx_x_q_, shape);
    grad_w_ = add(grad_w_, gw);
    return grad_x;
}

void QuantLinearLayer::controller_step() {
    if (cfg_.fallback_mode == FallbackMode::Threshold && !cfg_.passthrough) {
        threshold_state_ = controller_update(threshold_state_, last_rate_, cfg_.controller);
    }
}

void QuantLinearLayer::zero_grad() { grad_w_ = DenseMatrix(weight_.rows(), weight_.cols()); }

void QuantLinearLayer::apply_sgd(double lr) {
    std::vector<float> w(weight_.values());
    for (index_t i = 0; i < weight_.size(); ++i) {
        w[i] -= static_cast<float>(lr * static_cast<double>(grad_w_.data()[i]));
    }
    weight_ = DenseMatrix(weight_.rows(), weight_.cols(), std::move(w));
}

// ---------------------------------------------------------------------------
// RmsNorm

RmsNorm::RmsNorm(std::string name, index_t dim, QuantConfig cfg)
    : name_(std::move(name)),
      cfg_(std::move(cfg)),
      gain_(static_cast<std::size_t>(dim), 1.0f),
      grad_gain_(static_cast<std::size_t>(dim), 0.0f) {}

DenseMatrix RmsNorm::forward(const DenseMatrix& x) {
    const index_t rows = x.rows(), cols = x.cols();
    if (cols != static_cast<index_t>(gain_.size())) {
        throw std::invalid_argument(name_ + ": width does not match the gain vector");
    }
    std::vector<float> out(static_cast<std::size_t>(rows * cols));
    for (index_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (index_t c = 0; c < cols; ++c) {
            const double v = x(r, c);
            ss += v * v;
        }
        const float rms =
            std::sqrt(static_cast<float>(ss / static_cast<double>(cols)) + kEps);
        for (index_t c = 0; c < cols; ++c) {
            out[r * cols + c] = x(r, c) / rms * gain_[c];
        }
    }

    ctx_q_.reset();
    ctx_fp_.reset();
    if (cfg_.passthrough || cfg_.nonlinear_bits == 0) {
        ctx_fp_ = x;
    } else {
        ctx_q_ = quantize_rtn(x, GroupGeometry(1, cfg_.nonlinear_group),
                              BitWidth(cfg_.nonlinear_bits));
    }
    return DenseMatrix(rows, cols, std::move(out));
}

DenseMatrix RmsNorm::backward(const DenseMatrix& grad_y) {
    if (!ctx_q_.has_value() && !ctx_fp_.has_value()) {
        throw std::logic_error(name_ + ": backward without context");
    }
    const DenseMatrix x = ctx_fp_.has_value() ? *ctx_fp_ : dequantize(*ctx_q_);
    const index_t rows = x.rows(), cols = x.cols();
    std::vector<float> gx(static_cast<std::size_t>(rows * cols));
    for (index_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (index_t c = 0; c < cols; ++c) {
            const double v = x(r, c);
            ss += v * v;
        }
        const double rms = std::sqrt(ss / static_cast<double>(cols) + static_cast<double>(kEps));
        double dot = 0.0;
        for (index_t c = 0; c < cols; ++c) {
            dot += static_cast<double>(gain_[c]) * grad_y(r, c) * x(r, c);
        }
        const double inv = 1.0 / rms;
        const double corr = dot / (static_cast<double>(cols) * rms * rms * rms);
        for (index_t c = 0; c < cols; ++c) {
            const double h = static_cast<double>(gain_[c]) * grad_y(r, c);
            gx[r * cols + c] = static_cast<float>(h * inv - x(r, c) * corr);
            grad_gain_[c] += static_cast<float>(grad_y(r, c) * x(r, c) * inv);
        }
    }
    return DenseMatrix(rows, cols, std::move(gx));
}

void RmsNorm::zero_grad() { std::fill(grad_gain_.begin(), grad_gain_.end(), 0.0f); }

void RmsNorm::apply_sgd(double lr) {
    for (std::size_t i = 0; i < gain_.size(); ++i) {
        gain_[i] -= static_cast<float>(lr * static_cast<double>(grad_gain_[i]));
    }
}

// ---------------------------------------------------------------------------
// GluCombine / SiluLayer

DenseMatrix GluCombine::forward(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("glu combine: shape mismatch");
    }
    std::vector<float> out(static_cast<std::size_t>(a.size()));
    for (index_t i = 0; i < a.size(); ++i) {
        out[i] = silu_scalar(a.data()[i]) * b.data()[i];
    }
    ctx_a_q_.reset();
    ctx_b_q_.reset();
    ctx_a_fp_.reset();
    ctx_b_fp_.reset();
    if (cfg_.passthrough || cfg_.nonlinear_bits == 0) {
        ctx_a_fp_ = a;
        ctx_b_fp_ = b;
    } else {
        const GroupGeometry g(1, cfg_.nonlinear_group);
        const BitWidth bw(cfg_.nonlinear_bits);
        ctx_a_q_ = quantize_rtn(a, g, bw);
        ctx_b_q_ = quantize_rtn(b, g, bw);
    }
    return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

std::pair<DenseMatrix, DenseMatrix> GluCombine::backward(const DenseMatrix& grad_y) {
    if (!ctx_a_q_.has_value() && !ctx_a_fp_.has_value()) {
        throw std::logic_error("glu combine: backward without context");
    }
    const DenseMatrix a = ctx_a_fp_.has_value() ? *ctx_a_fp_ : dequantize(*ctx_a_q_);
    const DenseMatrix b = ctx_b_fp_.has_value() ? *ctx_b_fp_ : dequantize(*ctx_b_q_);
    std::vector<float> ga(static_cast<std::size_t>(a.size()));
    std::vector<float> gb(static_cast<std::size_t>(a.size()));
    for (index_t i = 0; i < a.size(); ++i) {
        const float gy = grad_y.data()[i];
        ga[i] = gy * b.data()[i] * silu_grad_scalar(a.data()[i]);
        gb[i] = gy * silu_scalar(a.data()[i]);
    }
    return {DenseMatrix(a.rows(), a.cols(), std::move(ga)),
            DenseMatrix(a.rows(), a.cols(), std::move(gb))};
}

DenseMatrix SiluLayer::forward(const DenseMatrix& x) {
    std::vector<float> out(static_cast<std::size_t>(x.size()));
    for (index_t i = 0; i < x.size(); ++i) out[i] = silu_scalar(x.data()[i]);
    ctx_q_.reset();
    ctx_fp_.reset();
    if (cfg_.passthrough || cfg_.nonlinear_bits == 0) {
        ctx_fp_ = x;
    } else {
        ctx_q_ = quantize_rtn(x, GroupGeometry(1, cfg_.nonlinear_group),
                              BitWidth(cfg_.nonlinear_bits));
    }
    return DenseMatrix(x.rows(), x.cols(), std::move(out));
}

DenseMatrix SiluLayer::backward(const DenseMatrix& grad_y) {
    if (!ctx_q_.has_value() && !ctx_fp_.has_value()) {
        throw std::logic_error("silu: backward without context");
    }
    const DenseMatrix x = ctx_fp_.has_value() ? *ctx_fp_ : dequantize(*ctx_q_);
    std::vector<float> gx(static_cast<std::size_t>(x.size()));
    for (index_t i = 0; i < x.size(); ++i) {
        gx[i] = grad_y.data()[i] * silu_grad_scalar(x.data()[i]);
    }
    return DenseMatrix(x.rows(), x.cols(), std::move(gx));
}

// ---------------------------------------------------------------------------
// GluBlock / GluMlpModel

DenseMatrix GluBlock::forward(const DenseMatrix& h, int step) {
    const DenseMatrix xn = norm.forward(h);
    const DenseMatrix a = gate.forward(xn, step);
    const DenseMatrix b = up.forward(xn, step);
    const DenseMatrix y = combine.forward(a, b);
    const DenseMatrix d = down.forward(y, step);
    return add(h, d);
}

DenseMatrix GluBlock::backward(const DenseMatrix& grad_out, int step) {
    const DenseMatrix grad_y = down.backward(grad_out, step);
    auto [grad_a, grad_b] = combine.backward(grad_y);
    const DenseMatrix grad_xn = add(gate.backward(grad_a, step), up.backward(grad_b, step));
    return add(norm.backward(grad_xn), grad_out);
}

GluMlpModel::GluMlpModel(const ModelConfig& mc, const QuantConfig& qc) : mcfg_(mc), qcfg_(qc) {
    const float s_in = 1.0f / std::sqrt(static_cast<float>(mc.d_model));
    const float s_ff = 1.0f / std::sqrt(static_cast<float>(mc.d_ff));
    int lid = 0;
    for (int bi = 0; bi < mc.n_blocks; ++bi) {
        const std::string prefix = "block" + std::to_string(bi) + ".";
        GluBlock blk{
            RmsNorm(prefix + "norm", mc.d_model, qc),
            QuantLinearLayer(prefix + "gate", lid + 0,
                             random_weight(mc.d_ff, mc.d_model, s_in,
                                           derive_seed(mc.init_seed, 10 + bi, 0)),
                             qc),
            QuantLinearLayer(prefix + "up", lid + 1,
                             random_weight(mc.d_ff, mc.d_model, s_in,
                                           derive_seed(mc.init_seed, 10 + bi, 1)),
                             qc),
            QuantLinearLayer(prefix + "down", lid + 2,
                             random_weight(mc.d_model, mc.d_ff, s_ff,
                                           derive_seed(mc.init_seed, 10 + bi, 2)),
                             qc),
            GluCombine(qc),
        };
        blocks_.push_back(std::move(blk));
        lid += 3;
    }
    head_w_ = random_weight(mc.d_out, mc.d_model, s_in, derive_seed(mc.init_seed, 99, 0));
}

DenseMatrix GluMlpModel::forward(const DenseMatrix& x, int step) {
    DenseMatrix h = x;
    for (GluBlock& blk : blocks_) {
        h = blk.forward(h, step);
    }
    saved_head_in_.clear();
    saved_head_in_.push_back(h);
    return gemm_oracle(h, fbq::transpose(head_w_));
}

void GluMlpModel::backward(const DenseMatrix& grad_pred, int step) {
    DenseMatrix grad_h = gemm_oracle(grad_pred, head_w_);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        grad_h = it->backward(grad_h, step);
    }
    saved_head_in_.clear();
}

void GluMlpModel::zero_grads() {
    for (GluBlock& blk : blocks_) {
        blk.norm.zero_grad();
        blk.gate.zero_grad();
        blk.up.zero_grad();
        blk.down.zero_grad();
    }
}

void GluMlpModel::apply_sgd(double lr) {
    for (GluBlock& blk : blocks_) {
        blk.norm.apply_sgd(lr);
        blk.gate.apply_sgd(lr);
        blk.up.apply_sgd(lr);
        blk.down.apply_sgd(lr);
    }
}

void GluMlpModel::controller_step() {
    for (GluBlock& blk : blocks_) {
        blk.gate.controller_step();
        blk.up.controller_step();
        blk.down.controller_step();
    }
}

std::vector<std::pair<std::string, std::vector<float>>> GluMlpModel::collect_grads() const {
    std::vector<std::pair<std::string, std::vector<float>>> out;
    for (const GluBlock& blk : blocks_) {
        out.emplace_back(blk.norm.name() + ".gain", blk.norm.grad_gain());
        out.emplace_back(blk.gate.name() + ".w", blk.gate.grad_weight().values());
        out.emplace_back(blk.up.name() + ".w", blk.up.grad_weight().values());
        out.emplace_back(blk.down.name() + ".w", blk.down.grad_weight().values());
    }
    return out;
}

GluMlpModel GluMlpModel::clone_with_quant(const QuantConfig& qc) const {
    GluMlpModel copy = *this;
    copy.qcfg_ = qc;
    for (GluBlock& blk : copy.blocks_) {
        blk.norm.set_config(qc);
        blk.gate.set_config(qc);
        blk.up.set_config(qc);
        blk.down.set_config(qc);
        blk.combine.set_config(qc);
    }
    return copy;
}

double GluMlpModel::mean_fallback_rate() const {
    double sum = 0.0;
    int n = 0;
    for (const GluBlock& blk : blocks_) {
        sum += blk.gate.last_fallback_rate() + blk.up.last_fallback_rate() +
               blk.down.last_fallback_rate();
        n += 3;
    }
    return n > 0 ? sum / n : 0.0;
}

double GluMlpModel::mean_threshold() const {
    double sum = 0.0;
    int n = 0;
    for (const GluBlock& blk : blocks_) {
        sum += blk.gate.threshold() + blk.up.threshold() + blk.down.threshold();
        n += 3;
    }
    return n > 0 ? sum / n : 1.0;
}

bool GluMlpModel::holds_full_precision_context() const {
    for (const GluBlock& blk : blocks_) {
        if (blk.norm.holds_full_precision_context() ||
            blk.gate.holds_full_precision_context() || blk.up.holds_full_precision_context() ||
            blk.down.holds_full_precision_context() ||
            blk.combine.holds_full_precision_context()) {
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Task plumbing

DenseMatrix make_batch(const TaskConfig& task, const ModelConfig& mc, int step) {
    const DeterministicRng rng(derive_seed(task.data_seed, static_cast<std::uint64_t>(step), 1));
    const DeterministicRng tail(derive_seed(task.data_seed, static_cast<std::uint64_t>(step), 2));
    std::vector<float> x(static_cast<std::size_t>(task.batch_tokens * mc.d_model));
    for (std::size_t i = 0; i < x.size(); ++i) {
        float v = task.input_scale * rng.normal_at(i);
        if (task.input_kind == InputKind::HeavyTail) {
            v *= static_cast<float>(
                std::exp(static_cast<double>(task.input_tail) * tail.normal_at(i)));
        }
        x[i] = v;
    }
    return DenseMatrix(task.batch_tokens, mc.d_model, std::move(x));
}

DenseMatrix teacher_targets(const TaskConfig& task, const ModelConfig& mc, const DenseMatrix& x) {
    const index_t hidden = 32;
    const float s1 = 1.0f / std::sqrt(static_cast<float>(mc.d_model));
    const float s2 = 1.0f / std::sqrt(static_cast<float>(hidden));
    const DenseMatrix w1 =
        random_weight(hidden, mc.d_model, s1, derive_seed(task.data_seed, 7777, 1));
    const DenseMatrix w2 =
        random_weight(mc.d_out, hidden, s2, derive_seed(task.data_seed, 7777, 2));

    DenseMatrix h = gemm_oracle(x, fbq::transpose(w1));
    std::vector<float> t(h.values());
    for (float& v : t) v = std::tanh(v);
    return gemm_oracle(DenseMatrix(h.rows(), h.cols(), std::move(t)), fbq::transpose(w2));
}

double mse_loss(const DenseMatrix& pred, const DenseMatrix& target) {
    double sum = 0.0;
    for (index_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred.data()[i]) - target.data()[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

DenseMatrix mse_grad(const DenseMatrix& pred, const DenseMatrix& target) {
    std::vector<float> g(static_cast<std::size_t>(pred.size()));
    const double inv = 2.0 / static_cast<double>(pred.size());
    for (index_t i = 0; i < pred.size(); ++i) {
        g[i] = static_cast<float>(
            inv * (static_cast<double>(pred.data()[i]) - target.data()[i]));
    }
    return DenseMatrix(pred.rows(), pred.cols(), std::move(g));
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

TrainResult train(const ModelConfig& mc, const TaskConfig& task, const QuantConfig& qc) {
    TrainResult result;

    GluMlpModel qmodel(mc, qc);
    QuantConfig fp_cfg = qc;
    fp_cfg.passthrough = true;
    GluMlpModel twin(mc, fp_cfg);

    std::vector<std::pair<std::string, double>> cossim_sums;

    for (int step = 0; step < task.steps; ++step) {
        const DenseMatrix x = make_batch(task, mc, step);
        const DenseMatrix target = teacher_targets(task, mc, x);

        StepTrace row;
        row.step = step;
        try {
            // quantized model
            qmodel.zero_grads();
            const DenseMatrix pred_q = qmodel.forward(x, step);
            row.loss_quant = mse_loss(pred_q, target);
            qmodel.backward(mse_grad(pred_q, target), step);

            // full-precision gradients at the same parameters
            GluMlpModel ref = qmodel.clone_with_quant(fp_cfg);
            ref.zero_grads();
            const DenseMatrix pred_ref = ref.forward(x, step);
            ref.backward(mse_grad(pred_ref, target), step);

            const auto gq = qmodel.collect_grads();
            const auto gr = ref.collect_grads();
            double sim_sum = 0.0;
            for (std::size_t p = 0; p < gq.size(); ++p) {
                const double sim = cosine_similarity(gq[p].second, gr[p].second);
                sim_sum += sim;
                if (cossim_sums.size() <= p) cossim_sums.emplace_back(gq[p].first, 0.0);
                cossim_sums[p].second += sim;
            }
            row.grad_cossim_mean = gq.empty() ? 1.0 : sim_sum / static_cast<double>(gq.size());
            row.fallback_rate_mean = qmodel.mean_fallback_rate();
            row.threshold_mean = qmodel.mean_threshold();

            if (step == task.steps - 1 || !std::isfinite(row.loss_quant)) {
                result.report.params.clear();
                for (std::size_t p = 0; p < gq.size(); ++p) {
                    ParamGradSim ps;
                    ps.param = gq[p].first;
                    ps.cossim_last = cosine_similarity(gq[p].second, gr[p].second);
                    ps.cossim_mean = cossim_sums[p].second / static_cast<double>(step + 1);
                    result.report.params.push_back(std::move(ps));
                }
            }

            // twin on its own trajectory
            twin.zero_grads();
            const DenseMatrix pred_fp = twin.forward(x, step);
            row.loss_fp = mse_loss(pred_fp, target);
            twin.backward(mse_grad(pred_fp, target), step);

            if (!std::isfinite(row.loss_quant) || !std::isfinite(row.loss_fp)) {
                result.report.diverged = true;
                result.trace.push_back(row);
                break;
            }

            qmodel.controller_step();
            for (const GluBlock& blk : qmodel.blocks()) {
                for (const QuantLinearLayer* l : {&blk.gate, &blk.up, &blk.down}) {
                    result.controller_trace.push_back(
                        {step, l->name(), l->threshold(), l->last_fallback_rate()});
                }
            }

            qmodel.apply_sgd(task.lr);
            twin.apply_sgd(task.lr);
        } catch (const std::invalid_argument&) {
            // non-finite values escaping into matrix construction: divergence
            result.report.diverged = true;
            result.trace.push_back(row);
            break;
        }

        result.trace.push_back(row);
        result.report.steps_run = step + 1;
    }
    return result;
}

} // namespace fbq
