#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "spikeforge/ensemble.hpp"
#include "spikeforge/loso.hpp"

namespace spikeforge {

/// Flat run configuration backing every CLI subcommand. Values resolve in
/// precedence order: profile defaults < config file < SPIKEFORGE_SEED (seed
/// only) < command-line flags.
struct RunConfig {
    std::string profile = "desk";

    // windowing
    Eigen::Index omega = 50;
    Eigen::Index stride = 50;
    Eigen::Index trim_threshold = 18000;
    Eigen::Index trim_cut = 6000;

    // encoder
    std::string encoder = "stal-stacked";
    int psi = 5;
    Eigen::Index hidden = 0;  // 0 -> omega * channels
    double stal_alpha = 25.0;
    double dropout = 0.5;
    double lambda = 1.0;
    int mi_bins = 16;
    double stal_lr = 5e-3;
    int stal_epochs = 30;
    int stal_patience = 5;
    double stal_min_delta = 1e-4;

    // classifier
    Eigen::Index n1 = 500;
    int tau = 5;
    double beta = 0.99;
    double u_thr = 1.0;
    double surrogate_alpha = 2.0;
    double srnn_lr = 7.5e-4;
    int srnn_epochs = 25;
    int srnn_patience = 5;
    double srnn_min_delta = 1e-4;

    double weight_decay = 1e-2;
    int batch_semg = 32;
    int batch_angle = 16;
    int batch_energy = 8;

    // meta-classifier
    int n_trees = 100;
    int max_depth = 4;

    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;

    /// Resolved ensemble configuration (encoder applied to all modalities).
    EnsembleConfig ensemble_config() const;

    /// Canonical JSON text of the fully resolved config (sorted keys).
    std::string resolved_json() const;

    /// 16-hex-digit FNV-1a digest of resolved_json().
    std::string digest() const;
};

/// Profile defaults: "desk" is the laptop-scale setup, "paper" the
/// full-scale one (omega=3000, n1=500, full epoch budgets).
RunConfig profile_defaults(const std::string& profile);

/// Overlays a JSON document onto the config. A "profile" key is applied
/// first (resetting the defaults); unknown keys raise invalid_argument.
void apply_config_text(RunConfig& cfg, const std::string& json_text);
void apply_config_file(RunConfig& cfg, const std::string& path);

/// SPIKEFORGE_SEED from the environment, if set; malformed values throw.
std::optional<std::uint64_t> env_seed();

}  // namespace spikeforge
