#pragma once

#include "spikeforge/mi.hpp"
#include "spikeforge/types.hpp"

namespace spikeforge {

/// Reshapes a hidden representation to the window length omega*c.
/// Identity when lengths match; cyclic repetition (truncated) when shorter;
/// 1-D average pooling with pool size and stride floor(l/target), truncated
/// to target, when longer.
Vector align_dims(const VectorRef& z, Eigen::Index target);

/// Adjoint of align_dims: pulls a gradient of the aligned vector back to the
/// source vector of length source_len.
Vector align_dims_backward(const VectorRef& grad_aligned, Eigen::Index source_len);

struct StalLossResult {
    double total = 0.0;
    double l_mi = 0.0;
    double l_s = 0.0;
};

/// Gradients of the loss with respect to the aligned hidden representations
/// and the raw (unscaled) weighted spike vector.
struct StalLossGrads {
    Vector z1;
    Vector z2;
    Vector b_hat;
};

/// Encoder loss: L = L_MI + L_S with
///   L_MI = -(1/3) (I[x_f; z1] + I[x_f; z2] + I[x_f; b_hat / p_sum]),
///   L_S  = lambda * || x_f - b_hat / p_sum ||_1.
/// z1 and z2 must already be aligned to x_f's length; b_hat is the raw
/// weighted spike vector and is rescaled to [0, 1] by the position-weight
/// sum before both terms.
StalLossResult stal_loss(const VectorRef& x_f, const VectorRef& z1_aligned,
                         const VectorRef& z2_aligned, const VectorRef& b_hat,
                         double position_weight_sum, double lambda,
                         const MiEstimatorConfig& cfg);

/// Same, also filling the analytic gradients. The L1 subgradient at
/// x_f = b_hat/p_sum is 0.
StalLossResult stal_loss_with_grad(const VectorRef& x_f, const VectorRef& z1_aligned,
                                   const VectorRef& z2_aligned, const VectorRef& b_hat,
                                   double position_weight_sum, double lambda,
                                   const MiEstimatorConfig& cfg, StalLossGrads& grads);

}  // namespace spikeforge
