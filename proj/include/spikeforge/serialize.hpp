#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeforge/ensemble.hpp"
#include "spikeforge/loso.hpp"

namespace spikeforge {

/// Exact double round-trip helpers used by the JSON model format: scalars
/// travel as C99 hex-float strings, dense arrays as base64 of their
/// little-endian IEEE-754 bytes (column-major).
std::string double_to_hex(double v);
double double_from_hex(const std::string& s);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string matrix_to_base64(const MatrixRef& m);
Matrix matrix_from_base64(const std::string& text, Eigen::Index rows,
                          Eigen::Index cols);

/// Current on-disk model format version.
inline constexpr int kModelFormatVersion = 1;

void save_stal_model(const StalModel& model, const std::string& path);
StalModel load_stal_model(const std::string& path);

void save_srnn_model(const SrnnModel& model, const std::string& path);
SrnnModel load_srnn_model(const std::string& path);

void save_forest(const ForestModel& model, const std::string& path);
ForestModel load_forest(const std::string& path);

/// Canonical file name of one modality stream inside a bundle directory.
std::string pipeline_filename(Modality m);

void save_pipeline(const ModalityPipeline& p, const std::string& path);
ModalityPipeline load_pipeline(const std::string& path);

/// Ensemble bundle: a directory holding pipeline_<modality>.json files, the
/// forest and a manifest carrying seed and config digest.
void save_ensemble(const EnsembleModel& model, const std::string& dir,
                   std::uint64_t seed, const std::string& config_digest);
EnsembleModel load_ensemble(const std::string& dir);

/// Digest stored in the ensemble manifest, empty when absent.
std::string ensemble_manifest_digest(const std::string& dir);

void write_report_json(const EvalReport& report, const std::string& path);
EvalReport read_report_json(const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);

/// Gnuplot-friendly whitespace table: one row per encoder report.
void write_report_dat(const std::vector<EvalReport>& reports,
                      const std::string& path);

/// Fixed-width comparison table across encoders (metrics and densities).
std::string report_comparison_table(const std::vector<EvalReport>& reports);

}  // namespace spikeforge
