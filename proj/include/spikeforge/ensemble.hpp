#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeforge/data.hpp"
#include "spikeforge/encode.hpp"
#include "spikeforge/forest.hpp"
#include "spikeforge/srnn.hpp"
#include "spikeforge/srnn_train.hpp"
#include "spikeforge/stal_train.hpp"

namespace spikeforge {

/// Window-to-spike-train encoder choices. The two STAL variants are trained;
/// rate and latency coding are the fixed baselines.
enum class EncoderKind { kStalStacked, kStalVanilla, kRate, kLatency };

std::string to_string(EncoderKind kind);
EncoderKind encoder_from_string(const std::string& name);

/// Everything needed to train one modality stream: encoder hyperparameters,
/// classifier hyperparameters and the two training configurations. Seeds are
/// filled in by ensemble_train from the master seed.
struct PipelineConfig {
    EncoderKind encoder = EncoderKind::kStalStacked;
    int psi = 5;
    Eigen::Index hidden = 0;  // 0 -> omega * channels
    double stal_alpha = 25.0;
    double dropout = 0.5;
    StalTrainConfig stal;

    Eigen::Index n1 = 500;
    int tau = 5;
    double beta = 0.99;
    double u_thr = 1.0;
    double surrogate_alpha = 2.0;
    SrnnTrainConfig srnn;
};

struct EnsembleConfig {
    Eigen::Index omega = 50;
    Eigen::Index stride = 50;
    PipelineConfig semg;
    PipelineConfig angle;
    PipelineConfig energy;
    ForestConfig forest;
    std::uint64_t seed = 0;

    PipelineConfig& pipeline(Modality m);
    const PipelineConfig& pipeline(Modality m) const;

    /// Applies the encoder kind to all three modality streams.
    void set_encoder(EncoderKind kind);
};

struct ModalityPipeline {
    Modality modality = Modality::kSemg;
    EncoderKind encoder = EncoderKind::kStalStacked;
    int psi = 5;                // spike slots for the fixed baselines
    std::uint64_t rate_seed = 0;
    StalModel stal;             // only populated for the STAL kinds
    SrnnModel srnn;

    bool uses_stal() const
    {
        return encoder == EncoderKind::kStalStacked ||
               encoder == EncoderKind::kStalVanilla;
    }
};

struct EnsembleModel {
    Eigen::Index omega = 0;
    Eigen::Index stride = 0;
    ModalityPipeline semg;
    ModalityPipeline angle;
    ModalityPipeline energy;
    ForestModel forest;

    ModalityPipeline& pipeline(Modality m);
    const ModalityPipeline& pipeline(Modality m) const;
};

/// Windows cut at the same subject and offset across all three modalities,
/// so the meta-classifier sees one aligned feature row per (subject, offset).
struct WindowTriple {
    std::string subject_id;
    Eigen::Index offset = 0;
    Matrix semg;
    Matrix angle;
    Matrix energy;
    int label = -1;

    const Matrix& window(Modality m) const;
};

std::vector<WindowTriple> make_window_triples(const Dataset& ds, Eigen::Index omega,
                                              Eigen::Index stride);

/// Full spike train of one window under the pipeline's encoder. Rate coding
/// derives its stream deterministically from the window contents, so repeat
/// calls agree.
SpikeTrain pipeline_spikes(const ModalityPipeline& p, const MatrixRef& window);

/// Collapsed spike train rescaled to [0, 1] by the position weight sum.
Vector pipeline_encode(const ModalityPipeline& p, const MatrixRef& window);

/// Softmax class probabilities of one window through the modality pipeline.
Vector pipeline_predict(const ModalityPipeline& p, const MatrixRef& window);

/// Meta-feature row in the fixed order
/// (sEMG_0, sEMG_1, Angle_0, Angle_1, Energy_0, Energy_1).
Vector build_meta_features(const EnsembleModel& model, const WindowTriple& triple);

/// Forest vote over the meta features of one aligned window triple.
int ensemble_predict(const EnsembleModel& model, const WindowTriple& triple);

/// Trains one modality stream: the encoder (for the STAL kinds) and the
/// R-LIF classifier on the training windows. Seeds derive from the master
/// seed and the modality, exactly as inside ensemble_train.
ModalityPipeline train_pipeline(const Dataset& train, Modality modality,
                                Eigen::Index omega, Eigen::Index stride,
                                PipelineConfig cfg, std::uint64_t master_seed);

/// Trains the three modality streams and the forest meta-classifier on the
/// given (already preprocessed) dataset. Meta features come from the same
/// training windows the pipelines were fitted on.
EnsembleModel ensemble_train(const Dataset& train, const EnsembleConfig& cfg);

}  // namespace spikeforge
