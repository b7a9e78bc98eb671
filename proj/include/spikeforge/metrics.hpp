#pragma once

#include <vector>

#include "spikeforge/types.hpp"

namespace spikeforge {

/// Binary confusion tallies; the positive class (1) is CLBP.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(const std::vector<int>& pred, const std::vector<int>& truth);

double accuracy(const ConfusionCounts& c);

/// Unweighted mean of the per-class F1 scores; a class with zero
/// precision-plus-recall contributes 0.
double macro_f1(const ConfusionCounts& c);

/// Per-class F1 (positive_class selects which class counts as "positive").
double f1_score(const ConfusionCounts& c, int positive_class = 1);

/// Matthews correlation; 0 when any marginal factor of the denominator is 0.
double mcc(const ConfusionCounts& c);

/// Mann-Whitney AUC with average ranks for tied scores. Single-class truth
/// is undefined: returns 0.5 and logs a warning.
double auc_mann_whitney(const std::vector<double>& scores,
                        const std::vector<int>& truth);

struct MetricSet {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double auc = 0.0;
    double mcc = 0.0;
};

/// All four metrics from predictions, truth and (optional) real-valued
/// scores; without scores the predictions themselves rank the samples.
MetricSet compute_metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                          const std::vector<double>* scores = nullptr);

/// Fraction of active entries in a spike train (any shape). Empty -> error.
double spike_density(const MatrixRef& spikes);

/// Harmonic mean of the three per-modality densities; any non-positive
/// density collapses the mean to 0.
double ensemble_density(double d_semg, double d_angle, double d_energy);

}  // namespace spikeforge
