#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spikeforge/types.hpp"

namespace spikeforge {

/// Channel counts per modality. Defaults follow the EmoPain sensor layout.
struct ChannelSchema {
    int semg = 4;
    int angle = 13;
    int energy = 13;

    int channels(Modality m) const
    {
        switch (m) {
            case Modality::kSemg: return semg;
            case Modality::kAngle: return angle;
            case Modality::kEnergy: return energy;
        }
        return 0;
    }
};

/// One subject x one modality continuous signal, time-major.
struct Recording {
    std::string subject_id;
    Modality modality = Modality::kSemg;
    Matrix data;  // time x channels
    double sample_rate_hz = 60.0;
    std::optional<int> pain_intensity;

    Eigen::Index length() const { return data.rows(); }
    Eigen::Index channels() const { return data.cols(); }
};

/// All recordings of a study, grouped by subject, plus binary labels.
/// A subject is labeled CLBP-positive (1) when its reported pain intensity
/// exceeds 5; subjects without a pain intensity stay unlabeled until a label
/// is supplied explicitly.
class Dataset {
public:
    void add(Recording rec);

    /// Sets or overrides a subject label (0 or 1).
    void set_label(const std::string& subject_id, int label);

    /// Subject ids in sorted order.
    std::vector<std::string> subjects() const;

    bool has(const std::string& subject_id, Modality m) const;
    const Recording& recording(const std::string& subject_id, Modality m) const;
    Recording& recording(const std::string& subject_id, Modality m);

    bool has_label(const std::string& subject_id) const;
    int label(const std::string& subject_id) const;
    const std::map<std::string, int>& labels() const { return labels_; }

    std::size_t recording_count() const;

    /// Every subject has exactly one recording per modality and a label.
    /// Throws data_error otherwise.
    void validate_complete() const;

    /// Applies fn to every recording (deterministic subject-sorted order).
    template <typename Fn>
    void for_each_recording(Fn&& fn)
    {
        for (auto& [id, per_mod] : recordings_)
            for (auto& [mod, rec] : per_mod) fn(rec);
    }
    template <typename Fn>
    void for_each_recording(Fn&& fn) const
    {
        for (const auto& [id, per_mod] : recordings_)
            for (const auto& [mod, rec] : per_mod) fn(rec);
    }

private:
    std::map<std::string, std::map<Modality, Recording>> recordings_;
    std::map<std::string, int> labels_;
};

/// A window cut from one recording, carrying its provenance.
struct Window {
    std::string subject_id;
    Modality modality = Modality::kSemg;
    Eigen::Index offset = 0;  // first time step in the source recording
    Matrix values;            // omega x channels
    int label = -1;           // subject label broadcast to the window; -1 if unknown
};

/// Ordered windows of one modality with a fixed length and stride.
struct WindowSet {
    std::vector<Window> windows;
    Eigen::Index omega = 0;
    Eigen::Index stride = 0;
};

/// Label rule: positive iff pain intensity is greater than 5.
/// Throws std::invalid_argument outside 0..10.
int derive_label(int pain_intensity);

/// Removes `cut` frames from each end of recordings longer than `threshold`
/// frames. Never returns fewer than one frame: if 2*cut >= length the centered
/// remainder of length max(1, length - 2*cut) is kept and a warning is logged.
Recording trim(const Recording& rec, Eigen::Index threshold = 18000,
               Eigen::Index cut = 6000);

/// Min-max normalization to [0, 1] over the whole recording (all channels of
/// the modality jointly). A constant recording maps to all zeros.
Recording normalize(const Recording& rec);

/// Appends zero rows until the recording has target_len frames.
/// Throws std::invalid_argument if the recording is already longer.
Recording pad_to(const Recording& rec, Eigen::Index target_len);

/// Longest recording length in the dataset.
Eigen::Index max_recording_length(const Dataset& ds);

/// Full preprocessing chain of the pipeline: trim, normalize, then pad every
/// recording to the longest post-trim length.
Dataset preprocess(const Dataset& ds, Eigen::Index trim_threshold = 18000,
                   Eigen::Index trim_cut = 6000);

/// Cuts windows of length omega at offsets 0, stride, 2*stride, ... while the
/// window fits; the incomplete tail is dropped. Windows inherit the subject
/// label where one is known. Throws std::invalid_argument when omega exceeds
/// a recording length.
WindowSet make_windows(const Dataset& ds, Modality modality, Eigen::Index omega,
                       Eigen::Index stride);

}  // namespace spikeforge
