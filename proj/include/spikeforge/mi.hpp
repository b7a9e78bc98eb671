#pragma once

#include "spikeforge/types.hpp"

namespace spikeforge {

/// Soft-histogram mutual information estimator. Values are clamped to [0, 1]
/// and spread over uniform bins with Gaussian kernel weights, which makes the
/// estimate differentiable in its inputs.
struct MiEstimatorConfig {
    int n_bins = 16;
    double soft_bandwidth = 0.0;  // <= 0 selects the bin width 1/n_bins

    double bandwidth() const
    {
        return soft_bandwidth > 0.0 ? soft_bandwidth : 1.0 / n_bins;
    }
    void validate() const
    {
        if (n_bins < 2) throw std::invalid_argument("n_bins must be >= 2");
    }
};

/// Normalized kernel weights of each value against every bin center
/// (rows: values, cols: bins; rows sum to 1).
Matrix soft_bin_weights(const VectorRef& values, const MiEstimatorConfig& cfg);

/// MI of the soft-binned joint distribution, in nats, floored at 0.
double mutual_information(const VectorRef& x, const VectorRef& y,
                          const MiEstimatorConfig& cfg);

/// Same value plus the gradient with respect to y. Entries of y outside
/// [0, 1] sit on the clamp and get zero gradient.
double mutual_information_with_grad(const VectorRef& x, const VectorRef& y,
                                    const MiEstimatorConfig& cfg, Vector& grad_y);

}  // namespace spikeforge
