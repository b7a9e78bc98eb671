#pragma once

#include <cstdint>

#include "spikeforge/rng.hpp"
#include "spikeforge/types.hpp"

namespace spikeforge {

enum class StalVariant { kStacked, kVanilla };
enum class RunMode { kTrain, kEval };

/// Per-feature batch normalization parameters of one feature-extraction block.
struct BatchNorm {
    Vector running_mean;
    Vector running_var;
    Vector gamma;  // scale
    Vector delta;  // shift

    void init(Eigen::Index n)
    {
        running_mean = Vector::Zero(n);
        running_var = Vector::Ones(n);
        gamma = Vector::Ones(n);
        delta = Vector::Zero(n);
    }
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Trainable spike encoder. The Stacked variant runs two dense feature
/// blocks (dense -> dropout -> ReLU -> batchnorm) before the spike
/// conversion; the Vanilla variant feeds the flattened window straight into
/// the repeat/threshold stage and carries no block parameters.
///
/// Layout conventions: a window of omega time steps and c channels flattens
/// time-major to x_f[t*c + k]. The expanded vector h keeps the psi spike
/// slots of one (t, k) cell contiguous: h[cell*psi + j].
struct StalModel {
    StalVariant variant = StalVariant::kStacked;
    Eigen::Index omega = 0;
    Eigen::Index channels = 0;
    Eigen::Index hidden = 0;  // l; equals omega*channels unless configured
    int psi = 1;
    double alpha = 25.0;  // sigmoid surrogate slope
    double dropout_p = 0.5;

    Matrix w1, w2;  // hidden x input, hidden x hidden
    Vector b1, b2;
    BatchNorm bn1, bn2;

    Vector phi;               // learnable thresholds, length omega*psi*channels
    Vector position_weights;  // p_j = 2^(j-1), length psi

    Eigen::Index cells() const { return omega * channels; }
    double position_weight_sum() const { return position_weights.sum(); }
    void check_window(const MatrixRef& window) const;
};

/// Freshly initialized model: dense weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// thresholds U(0, 1). `hidden` <= 0 picks the default l = omega*channels.
StalModel make_stal_model(StalVariant variant, Eigen::Index omega,
                          Eigen::Index channels, int psi, Eigen::Index hidden,
                          double alpha, double dropout_p, std::uint64_t seed);

/// Spike train of one window. Rows index the omega*c cells (time-major),
/// columns the psi spike slots.
struct SpikeTrain {
    Matrix spikes;       // B, entries in {0, 1}
    Matrix soft_spikes;  // B_soft, sigmoid surrogate activations in (0, 1)
    Vector weighted;     // B_hat, length omega*c

    Eigen::Index total_slots() const { return spikes.size(); }
    double spike_count() const { return spikes.sum(); }
};

/// Flattens an omega x c window time-major: x_f[t*c + k] = window(t, k).
Vector flatten_time_major(const MatrixRef& window);

/// Element-wise repetition: each entry of z appears psi consecutive times.
Vector repeat_expand(const VectorRef& z, int psi);

/// B_hat[cell] = sum_j p_j * B[cell, j]. With binary position weights the map
/// from spike pattern to value is injective per cell.
Vector collapse_weighted(const MatrixRef& spikes, const VectorRef& position_weights);

/// Binary positional weights 1, 2, 4, ..., 2^(psi-1).
Vector binary_position_weights(int psi);

/// n thresholds drawn independently from U(a, b).
Vector init_thresholds(Eigen::Index n, double a, double b, std::uint64_t seed);

struct StalActivations {
    Vector x_f;  // flattened window
    Vector z1;   // first block output (x_f for the Vanilla variant)
    Vector z2;   // second block output (x_f for the Vanilla variant)
    SpikeTrain train;
};

/// Runs the encoder on one window. Train mode applies dropout (which needs
/// the rng) and normalizes with running batch statistics; eval mode is
/// deterministic. The batched training path lives in stal_train.
StalActivations stal_forward(const StalModel& model, const MatrixRef& window,
                             RunMode mode = RunMode::kEval, Rng* rng = nullptr);

/// Rate coding: each slot fires with probability equal to the input value.
SpikeTrain rate_encode(const MatrixRef& window, int psi, Rng& rng);

/// Latency coding: exactly one spike per cell at slot
/// round((1 - value) * (psi - 1)); larger values fire earlier.
SpikeTrain latency_encode(const MatrixRef& window, int psi);

}  // namespace spikeforge
