#pragma once

#include <string>
#include <vector>

#include "spikeforge/ensemble.hpp"
#include "spikeforge/metrics.hpp"

namespace spikeforge {

/// Outcome of one leave-one-subject-out fold: the held-out subject's
/// aggregated prediction plus per-modality spike densities on its windows.
struct FoldOutcome {
    std::string subject_id;
    int truth = -1;
    int predicted = 0;
    double clbp_fraction = 0.0;  // fraction of windows predicted CLBP
    std::size_t n_windows = 0;
    std::size_t correct_windows = 0;
    double density_semg = 0.0;
    double density_angle = 0.0;
    double density_energy = 0.0;
};

struct EvalReport {
    std::string encoder;
    std::uint64_t seed = 0;
    std::string config_digest;
    MetricSet subject_metrics;     // primary: one unit per held-out subject
    double window_accuracy = 0.0;  // diagnostic: pooled over all test windows
    double density_semg = 0.0;
    double density_angle = 0.0;
    double density_energy = 0.0;
    double density_ensemble = 0.0;
    std::vector<FoldOutcome> folds;
};

struct LosoConfig {
    EnsembleConfig ensemble;
    int workers = 1;
    std::string checkpoint_dir;   // empty disables fold checkpoints
    std::string config_digest;    // stale-checkpoint guard, stored per fold
};

/// Trains on every subject but one and evaluates on the held-out windows.
/// Window votes aggregate to the subject prediction (majority, ties ->
/// healthy). The fold seed derives from the master seed and the subject id,
/// so results do not depend on subject enumeration order.
FoldOutcome run_fold(const Dataset& ds, const std::string& held_out,
                     const LosoConfig& cfg);

/// Full cross-validation over all subjects. With a checkpoint directory,
/// completed folds are loaded from disk instead of recomputed (matching
/// digest and seed required) and fresh folds are saved as they finish.
EvalReport loso_run(const Dataset& ds, const LosoConfig& cfg);

/// Subject-level aggregation used by loso_run, exposed for report assembly.
EvalReport assemble_report(const std::vector<FoldOutcome>& folds,
                           const std::string& encoder, std::uint64_t seed);

}  // namespace spikeforge
