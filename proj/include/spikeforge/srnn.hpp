#pragma once

#include <cstdint>

#include "spikeforge/types.hpp"

namespace spikeforge {

/// Two-layer recurrent leaky integrate-and-fire classifier. Both layers
/// follow U'[t] = beta*U[t-1] + I[t] + W_rec*S[t-1] - S[t-1]*u_thr with
/// reset-by-subtraction; layer 1 is driven by W_in * x[t], layer 2 by
/// W_12 * S1[t]. Class scores accumulate output spikes and potentials over
/// the tau simulation steps.
struct SrnnModel {
    Eigen::Index d_in = 0;
    Eigen::Index n1 = 500;
    static constexpr Eigen::Index kClasses = 2;
    double beta = 0.99;
    double u_thr = 1.0;
    int tau = 5;
    double surrogate_alpha = 2.0;

    Matrix w_in;    // n1 x d_in
    Matrix w_12;    // 2 x n1
    Matrix w_rec1;  // n1 x n1
    Matrix w_rec2;  // 2 x 2

    void check() const;
};

SrnnModel make_srnn_model(Eigen::Index d_in, Eigen::Index n1, int tau, double beta,
                          double u_thr, double surrogate_alpha, std::uint64_t seed);

struct SrnnState {
    Vector u1, s1, u2, s2;

    void reset(const SrnnModel& model);
};

/// Forward spike nonlinearity. Hard mode is the Heaviside used everywhere in
/// the pipeline; smooth mode replaces it with the antiderivative of the
/// surrogate so finite-difference gradient checks see a differentiable model.
enum class SpikeMode { kHard, kSmooth };

/// Chunk count d_in for a flattened window of the given length.
Eigen::Index srnn_input_dim(Eigen::Index flattened_len, int tau);

/// Rescales B_hat by 1/p_sum, right-pads with zeros to a multiple of tau and
/// splits it into tau contiguous chunks, returned as the columns of a
/// d_in x tau matrix (column t is the step-t input).
Matrix adapt_input(const VectorRef& b_hat, int tau, double p_sum = 1.0);

/// Advances the state by one step on input x (length d_in).
void rlif_step(const SrnnModel& model, SrnnState& state, const VectorRef& x,
               SpikeMode mode = SpikeMode::kHard);

/// Complete unrolled forward pass, retained for backpropagation through time.
struct SrnnTrace {
    Matrix x;       // d_in x tau
    Matrix u1, s1;  // n1 x tau
    Matrix u2, s2;  // 2 x tau
    Vector logits;  // length 2
};

SrnnTrace srnn_trace(const SrnnModel& model, const MatrixRef& steps,
                     SpikeMode mode = SpikeMode::kHard);

struct SrnnOutput {
    Matrix s_out;   // tau x 2 output spikes
    Matrix u_out;   // tau x 2 output potentials
    Vector logits;  // per-class cumulative activity
    int predicted = 0;
};

/// Runs tau steps from zero state on an adapted B_hat. logits(k) =
/// sum_t s_out(t,k) + sum_t u_out(t,k); argmax with ties resolved to class 0.
SrnnOutput srnn_forward(const SrnnModel& model, const VectorRef& b_hat,
                        double p_sum = 1.0);

int argmax_class(const VectorRef& logits);

Vector softmax(const VectorRef& logits);

/// Softmax cross entropy with probabilities clamped to [1e-12, 1].
double cross_entropy(const VectorRef& logits, int label);

/// d(cross_entropy)/d(logits) = softmax(logits) - onehot(label).
Vector cross_entropy_grad(const VectorRef& logits, int label);

/// Shifted arc-tan surrogate derivative (1/pi) / (1 + (pi*u*alpha/2)^2),
/// evaluated at u = U - u_thr.
double surrogate_grad(double u, double alpha);

/// Antiderivative of surrogate_grad, normalized to 0.5 at u = 0; the smooth
/// stand-in for the Heaviside in SpikeMode::kSmooth.
double smooth_spike(double u, double alpha);

}  // namespace spikeforge
