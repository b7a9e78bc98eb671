#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace spikeforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// One input stream of the multimodal recording.
enum class Modality { kSemg = 0, kAngle = 1, kEnergy = 2 };

inline constexpr int kNumModalities = 3;

inline const char* to_string(Modality m)
{
    switch (m) {
        case Modality::kSemg: return "sEMG";
        case Modality::kAngle: return "Angle";
        case Modality::kEnergy: return "Energy";
    }
    return "?";
}

/// Parses the CSV spelling of a modality. Throws std::invalid_argument on
/// unknown names.
Modality modality_from_string(const std::string& s);

/// Malformed or inconsistent input data (bad CSV rows, schema violations,
/// duplicated cells, missing modalities). CLI exit code 3.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Missing or unusable persisted state (model file absent, unfitted model).
/// CLI exit code 4.
struct state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch between operands.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Warnings (degenerate trims, single-class AUC, ...) go through this hook so
/// the CLI can copy them into the run log. Defaults to stderr.
void log_warning(const std::string& message);

/// Replaces the warning sink; pass nullptr to restore the stderr default.
void set_warning_sink(std::function<void(const std::string&)> sink);

}  // namespace spikeforge
