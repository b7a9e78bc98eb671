#pragma once

#include <cstdint>

#include "spikeforge/data.hpp"

namespace spikeforge {

/// Deterministic multimodal biosignal generator used in place of the
/// license-restricted clinical recordings. Positive (CLBP-like) subjects
/// differ structurally from negatives:
///   - sEMG: faster bursts with a sharper duty cycle and a cross-channel
///     amplitude tilt,
///   - Angle: differentially reduced range of motion and slower movement,
///   - Energy: lower and more peaked effort with a matching channel tilt.
/// Per-recording min-max normalization removes any global affine difference,
/// so all class information lives in temporal structure and between-channel
/// ratios, by construction.
///
/// Deterministic given the seed; subject k always draws from its own derived
/// stream, so datasets with different sizes share their common prefix.
Dataset synthesize_dataset(int n_subjects, int n_positive, Eigen::Index length,
                           std::uint64_t seed);

}  // namespace spikeforge
