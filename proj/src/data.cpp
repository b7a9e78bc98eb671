#include "spikeforge/data.hpp"

#include <algorithm>
#include <cmath>

namespace spikeforge {

void Dataset::add(Recording rec)
{
    if (!rec.data.allFinite())
        throw data_error("recording " + rec.subject_id + "/" +
                         to_string(rec.modality) + " contains non-finite values");
    if (rec.pain_intensity) set_label(rec.subject_id, derive_label(*rec.pain_intensity));
    recordings_[rec.subject_id][rec.modality] = std::move(rec);
}

void Dataset::set_label(const std::string& subject_id, int label)
{
    if (label != 0 && label != 1)
        throw std::invalid_argument("label must be 0 or 1");
    labels_[subject_id] = label;
}

std::vector<std::string> Dataset::subjects() const
{
    std::vector<std::string> ids;
    ids.reserve(recordings_.size());
    for (const auto& [id, _] : recordings_) ids.push_back(id);
    return ids;
}

bool Dataset::has(const std::string& subject_id, Modality m) const
{
    auto it = recordings_.find(subject_id);
    return it != recordings_.end() && it->second.count(m) > 0;
}

const Recording& Dataset::recording(const std::string& subject_id, Modality m) const
{
    auto it = recordings_.find(subject_id);
    if (it == recordings_.end() || !it->second.count(m))
        throw data_error("no recording for subject " + subject_id + " modality " +
                         to_string(m));
    return it->second.at(m);
}

Recording& Dataset::recording(const std::string& subject_id, Modality m)
{
    return const_cast<Recording&>(
        static_cast<const Dataset*>(this)->recording(subject_id, m));
}

bool Dataset::has_label(const std::string& subject_id) const
{
    return labels_.count(subject_id) > 0;
}

int Dataset::label(const std::string& subject_id) const
{
    auto it = labels_.find(subject_id);
    if (it == labels_.end())
        throw data_error("subject " + subject_id + " has no label");
    return it->second;
}

std::size_t Dataset::recording_count() const
{
    std::size_t n = 0;
    for (const auto& [_, per_mod] : recordings_) n += per_mod.size();
    return n;
}

void Dataset::validate_complete() const
{
    static const Modality kAll[] = {Modality::kSemg, Modality::kAngle,
                                    Modality::kEnergy};
    for (const auto& [id, per_mod] : recordings_) {
        for (Modality m : kAll)
            if (!per_mod.count(m))
                throw data_error("subject " + id + " is missing modality " +
                                 to_string(m));
        if (!labels_.count(id))
            throw data_error("subject " + id + " has no label");
    }
}

int derive_label(int pain_intensity)
{
    if (pain_intensity < 0 || pain_intensity > 10)
        throw std::invalid_argument("pain intensity must be in 0..10, got " +
                                    std::to_string(pain_intensity));
    return pain_intensity > 5 ? 1 : 0;
}

Recording trim(const Recording& rec, Eigen::Index threshold, Eigen::Index cut)
{
    const Eigen::Index len = rec.length();
    if (len < 1) throw std::invalid_argument("trim: empty recording");
    if (len <= threshold) return rec;

    const Eigen::Index keep = std::max<Eigen::Index>(1, len - 2 * cut);
    if (keep != len - 2 * cut)
        log_warning("trim: recording " + rec.subject_id + "/" +
                    to_string(rec.modality) + " shorter than 2*cut, keeping centered " +
                    std::to_string(keep) + " frame(s)");
    const Eigen::Index start = (len - keep) / 2;
    Recording out = rec;
    out.data = rec.data.middleRows(start, keep).eval();
    return out;
}

Recording normalize(const Recording& rec)
{
    if (!rec.data.allFinite())
        throw std::invalid_argument("normalize: non-finite values");
    const double lo = rec.data.minCoeff();
    const double hi = rec.data.maxCoeff();
    Recording out = rec;
    if (hi == lo) {
        out.data.setZero();
    } else {
        out.data = ((rec.data.array() - lo) / (hi - lo)).matrix();
    }
    return out;
}

Recording pad_to(const Recording& rec, Eigen::Index target_len)
{
    if (rec.length() > target_len)
        throw std::invalid_argument("pad_to: recording longer than target (trim first)");
    if (rec.length() == target_len) return rec;
    Recording out = rec;
    out.data = Matrix::Zero(target_len, rec.channels());
    out.data.topRows(rec.length()) = rec.data;
    return out;
}

Eigen::Index max_recording_length(const Dataset& ds)
{
    Eigen::Index longest = 0;
    ds.for_each_recording(
        [&](const Recording& r) { longest = std::max(longest, r.length()); });
    return longest;
}

Dataset preprocess(const Dataset& ds, Eigen::Index trim_threshold,
                   Eigen::Index trim_cut)
{
    Dataset out = ds;
    out.for_each_recording([&](Recording& r) {
        r = normalize(trim(r, trim_threshold, trim_cut));
    });
    const Eigen::Index longest = max_recording_length(out);
    out.for_each_recording([&](Recording& r) { r = pad_to(r, longest); });
    return out;
}

WindowSet make_windows(const Dataset& ds, Modality modality, Eigen::Index omega,
                       Eigen::Index stride)
{
    if (omega < 1 || stride < 1)
        throw std::invalid_argument("make_windows: omega and stride must be >= 1");
    WindowSet ws;
    ws.omega = omega;
    ws.stride = stride;
    for (const auto& id : ds.subjects()) {
        const Recording& rec = ds.recording(id, modality);
        if (omega > rec.length())
            throw std::invalid_argument("make_windows: omega exceeds recording length");
        const int label = ds.has_label(id) ? ds.label(id) : -1;
        for (Eigen::Index off = 0; off + omega <= rec.length(); off += stride) {
            Window w;
            w.subject_id = id;
            w.modality = modality;
            w.offset = off;
            w.values = rec.data.middleRows(off, omega).eval();
            w.label = label;
            ws.windows.push_back(std::move(w));
        }
    }
    return ws;
}

}  // namespace spikeforge
