#pragma once

#include <cstdint>
#include <vector>

#include "spikeforge/optim.hpp"
#include "spikeforge/rng.hpp"
#include "spikeforge/srnn.hpp"

namespace spikeforge {

/// One training example for the classifier: a collapsed spike train already
/// rescaled to [0, 1] (divided by the sum of the position weights) plus its
/// binary label.
struct EncodedSample {
    Vector b_hat;
    int label = 0;
};

struct SrnnTrainConfig {
    double lr = 7.5e-4;
    double weight_decay = 1e-2;
    int epochs = 25;
    int batch_size = 32;
    int patience = 5;
    double min_delta = 1e-4;
    std::uint64_t seed = 0;
};

struct SrnnEpochStats {
    double loss = 0.0;      // mean cross entropy over the resampled epoch
    double accuracy = 0.0;  // fraction of resampled windows predicted correctly
};

struct SrnnTrainResult {
    std::vector<SrnnEpochStats> history;
    int best_epoch = 0;
    double best_loss = 0.0;
    int epochs_run = 0;
};

/// Class-balanced resampling: indices drawn with replacement, each sample
/// weighted by the inverse frequency of its class, ceil(N / batch_size)
/// batches per epoch. Throws if only one class is present.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<int>& labels,
                                                   int batch_size, Rng& rng);

/// Cross entropy of one adapted sample plus, when grads is non-null,
/// d(loss)/d(weights) in the order w_in, w_12, w_rec1, w_rec2 (accumulated).
/// predicted, when non-null, receives the argmax class of the forward pass.
double srnn_loss_grads(const SrnnModel& model, const MatrixRef& steps, int label,
                       SpikeMode mode, std::vector<Matrix>* grads,
                       int* predicted = nullptr);

/// Registers the four weight matrices (all with weight decay).
void register_srnn_params(SrnnModel& model, AdamW& opt);

/// BPTT training with class-balanced batches; the model is left at the
/// parameters of the best epoch by training loss.
SrnnTrainResult train_srnn(SrnnModel& model, const std::vector<EncodedSample>& samples,
                           const SrnnTrainConfig& cfg);

}  // namespace spikeforge
