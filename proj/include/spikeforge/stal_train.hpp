#pragma once

#include <cstdint>
#include <vector>

#include "spikeforge/encode.hpp"
#include "spikeforge/mi.hpp"
#include "spikeforge/optim.hpp"
#include "spikeforge/stal_loss.hpp"

namespace spikeforge {

struct StalTrainConfig {
    double lambda = 1.0;     // sparsity weight
    double lr = 5e-3;
    double weight_decay = 1e-2;
    int epochs = 30;
    int batch_size = 32;
    int patience = 5;        // epochs without improvement before stopping
    double min_delta = 1e-4; // improvement threshold on the epoch loss
    MiEstimatorConfig mi;
    std::uint64_t seed = 0;
};

struct StalEpochStats {
    double total = 0.0;
    double l_mi = 0.0;
    double l_s = 0.0;
};

struct StalTrainResult {
    std::vector<StalEpochStats> history;  // mean training loss per epoch
    int best_epoch = 0;                   // zero-based index into history
    double best_loss = 0.0;
    int epochs_run = 0;
};

/// One mini-batch with frozen dropout masks, so a single training step is a
/// deterministic function of the model parameters (required for gradient
/// checks). Masks hold the inverted-dropout scale 1/keep or 0; empty masks
/// mean no dropout.
struct StalBatch {
    Matrix inputs;  // omega*c x batch, flattened windows
    Matrix mask1;
    Matrix mask2;
};

StalBatch make_stal_batch(const StalModel& model, const std::vector<Matrix>& windows,
                          const std::vector<std::size_t>& idx, Rng* rng);

/// Mean training-mode loss over the batch. Normalization uses batch
/// statistics; running statistics are updated only when update_running is
/// set. When grads is non-null it must come from an optimizer whose blocks
/// were registered with register_stal_params, and receives d(mean loss)/d(param).
StalEpochStats stal_batch_loss(StalModel& model, const StalBatch& batch, double lambda,
                               const MiEstimatorConfig& mi, std::vector<Matrix>* grads,
                               bool update_running);

/// Registers the trainable blocks in a fixed order (Stacked: w1, b1, gamma1,
/// delta1, w2, b2, gamma2, delta2, phi; Vanilla: phi). Only the dense weight
/// matrices receive weight decay.
void register_stal_params(StalModel& model, AdamW& opt);

/// Self-supervised training on a window set; the model is updated in place
/// and left at the parameters of the best epoch.
StalTrainResult train_stal(StalModel& model, const std::vector<Matrix>& windows,
                           const StalTrainConfig& cfg);

}  // namespace spikeforge
