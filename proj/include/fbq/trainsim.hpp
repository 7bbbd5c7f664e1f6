#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbq/gemm.hpp"
#include "fbq/matrix.hpp"
#include "fbq/policy.hpp"
#include "fbq/quant.hpp"

namespace fbq {

enum class FallbackMode { Threshold, FixedRate, Off };

// Quantization plan for the toy trainer. passthrough disables quantization
// entirely (pure fp paths); nonlinear_bits == 0 keeps non-linear contexts in
// full precision.
struct QuantConfig {
    bool passthrough = false;
    int bits_x = 8;
    int bits_w = 8;
    int bits_grad = 8;
    int context_bits = 8;   // stored X context (stochastic)
    int nonlinear_bits = 10;
    index_t block = 32;           // linear-path quantization block side
    index_t nonlinear_group = 128; // 1 x group row segments
    FallbackMode fallback_mode = FallbackMode::Threshold;
    double fixed_rate = 0.0;
    ControllerConfig controller{0.1, 0.3, 1.3};
    double threshold_init = 1.0;
    std::uint64_t seed = 0x5eedull; // stochastic-rounding seed base
};

// Linear layer with fallback-quantized forward and stochastically rounded
// backward. Stores only the quantized X as context in quantized mode.
class QuantLinearLayer {
public:
    QuantLinearLayer(std::string name, int layer_id, DenseMatrix weight, QuantConfig cfg);

    DenseMatrix forward(const DenseMatrix& x, int step);
    DenseMatrix backward(const DenseMatrix& grad_y, int step); // returns grad_x, accumulates grad_w

    const std::string& name() const { return name_; }
    const DenseMatrix& weight() const { return weight_; }
    const DenseMatrix& grad_weight() const { return grad_w_; }
    double last_fallback_rate() const { return last_rate_; }
    double threshold() const { return threshold_state_.threshold; }
    bool holds_full_precision_context() const { return ctx_x_fp_.has_value(); }

    void controller_step(); // delay-threshold update from the last observed rate
    void zero_grad();
    void apply_sgd(double lr);
    void set_config(const QuantConfig& cfg) { cfg_ = cfg; }

private:
    std::string name_;
    int layer_id_;
    QuantConfig cfg_;
    DenseMatrix weight_;
    DenseMatrix grad_w_;
    FallbackThresholdState threshold_state_;
    double last_rate_ = 0.0;
    std::optional<QuantizedTensor> ctx_x_q_;
    std::optional<DenseMatrix> ctx_x_fp_;
};

// Row-wise RMS normalization with a learned gain. Context is the input,
// quantized to nonlinear_bits at 1 x nonlinear_group.
class RmsNorm {
public:
    RmsNorm(std::string name, index_t dim, QuantConfig cfg);

    DenseMatrix forward(const DenseMatrix& x);
    DenseMatrix backward(const DenseMatrix& grad_y);

    const std::string& name() const { return name_; }
    const std::vector<float>& gain() const { return gain_; }
    const std::vector<float>& grad_gain() const { return grad_gain_; }
    bool holds_full_precision_context() const { return ctx_fp_.has_value(); }

    void zero_grad();
    void apply_sgd(double lr);
    void set_config(const QuantConfig& cfg) { cfg_ = cfg; }

    static constexpr float kEps = 1e-6f;

private:
    std::string name_;
    QuantConfig cfg_;
    std::vector<float> gain_;
    std::vector<float> grad_gain_;
    std::optional<QuantizedTensor> ctx_q_;
    std::optional<DenseMatrix> ctx_fp_;
};

// y = silu(a) * b; both inputs are saved as 10-bit contexts.
class GluCombine {
public:
    explicit GluCombine(QuantConfig cfg) : cfg_(std::move(cfg)) {}

    DenseMatrix forward(const DenseMatrix& a, const DenseMatrix& b);
    std::pair<DenseMatrix, DenseMatrix> backward(const DenseMatrix& grad_y);

    bool holds_full_precision_context() const {
        return ctx_a_fp_.has_value() || ctx_b_fp_.has_value();
    }
    void set_config(const QuantConfig& cfg) { cfg_ = cfg; }

private:
    QuantConfig cfg_;
    std::optional<QuantizedTensor> ctx_a_q_, ctx_b_q_;
    std::optional<DenseMatrix> ctx_a_fp_, ctx_b_fp_;
};

// Standalone SiLU with quantized context.
class SiluLayer {
public:
    explicit SiluLayer(QuantConfig cfg) : cfg_(std::move(cfg)) {}

    DenseMatrix forward(const DenseMatrix& x);
    DenseMatrix backward(const DenseMatrix& grad_y);

    bool holds_full_precision_context() const { return ctx_fp_.has_value(); }

private:
    QuantConfig cfg_;
    std::optional<QuantizedTensor> ctx_q_;
    std::optional<DenseMatrix> ctx_fp_;
};

float silu_scalar(float x);
float silu_grad_scalar(float x);

// Pre-norm residual GLU block: h + down(silu(gate(norm(h))) * up(norm(h))).
struct GluBlock {
    RmsNorm norm;
    QuantLinearLayer gate;
    QuantLinearLayer up;
    QuantLinearLayer down;
    GluCombine combine;

    DenseMatrix forward(const DenseMatrix& h, int step);
    DenseMatrix backward(const DenseMatrix& grad_out, int step);
};

struct ModelConfig {
    index_t d_model = 64;
    index_t d_ff = 128;
    index_t d_out = 8;
    int n_blocks = 2;
    std::uint64_t init_seed = 7;
};

// Stack of GLU blocks with a fixed (untrained) readout projection.
class GluMlpModel {
public:
    GluMlpModel(const ModelConfig& mc, const QuantConfig& qc);

    DenseMatrix forward(const DenseMatrix& x, int step);
    void backward(const DenseMatrix& grad_pred, int step);

    void zero_grads();
    void apply_sgd(double lr);
    void controller_step();

    // flattened copies of every trainable parameter gradient
    std::vector<std::pair<std::string, std::vector<float>>> collect_grads() const;

    GluMlpModel clone_with_quant(const QuantConfig& qc) const;

    std::vector<GluBlock>& blocks() { return blocks_; }
    const std::vector<GluBlock>& blocks() const { return blocks_; }
    const ModelConfig& model_config() const { return mcfg_; }
    const QuantConfig& quant_config() const { return qcfg_; }
    double mean_fallback_rate() const;
    double mean_threshold() const;
    bool holds_full_precision_context() const;

private:
    ModelConfig mcfg_;
    QuantConfig qcfg_;
    std::vector<GluBlock> blocks_;
    DenseMatrix head_w_; // d_out x d_model, fixed random projection
    std::vector<DenseMatrix> saved_head_in_; // transient, cleared by backward
};

enum class InputKind { Gaussian, HeavyTail };

struct TaskConfig {
    index_t batch_tokens = 16;
    int steps = 100;
    double lr = 0.05;
    std::uint64_t data_seed = 42;
    InputKind input_kind = InputKind::Gaussian;
    float input_tail = 0.8f; // lognormal tail for HeavyTail inputs
    float input_scale = 1.0f;
};

struct StepTrace {
    int step = 0;
    double loss_quant = 0.0;
    double loss_fp = 0.0;
    double grad_cossim_mean = 1.0;
    double fallback_rate_mean = 0.0;
    double threshold_mean = 1.0;
};

struct ControllerTraceRow {
    int step = 0;
    std::string layer;
    double threshold = 1.0;
    double observed_rate = 0.0;
};

struct ParamGradSim {
    std::string param;
    double cossim_mean = 1.0;
    double cossim_last = 1.0;
};

struct GradReport {
    std::vector<ParamGradSim> params;
    bool diverged = false;
    int steps_run = 0;
};

struct TrainResult {
    std::vector<StepTrace> trace;
    std::vector<ControllerTraceRow> controller_trace;
    GradReport report;
};

DenseMatrix make_batch(const TaskConfig& task, const ModelConfig& mc, int step);
DenseMatrix teacher_targets(const TaskConfig& task, const ModelConfig& mc, const DenseMatrix& x);

double mse_loss(const DenseMatrix& pred, const DenseMatrix& target);
DenseMatrix mse_grad(const DenseMatrix& pred, const DenseMatrix& target);

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

// Paired training: the quantized model and a full-precision twin share
// initialization and data order. Per-step gradient cosine compares the
// quantized model's gradients with full-precision gradients recomputed at the
// same parameters.
TrainResult train(const ModelConfig& mc, const TaskConfig& task, const QuantConfig& qc);

} // namespace fbq
