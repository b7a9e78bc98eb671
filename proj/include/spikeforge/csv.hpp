#pragma once

#include <filesystem>
#include <string>

#include "spikeforge/data.hpp"

namespace spikeforge {

/// Reads one dataset CSV with the header
///   subject_id,modality,channel_index,time_index,value,pain_intensity
/// into an existing Dataset. Rows may arrive in any order; matrices come out
/// time-sorted and channel-ordered. pain_intensity may be empty.
///
/// Throws data_error with a line number for malformed rows, channel indices
/// outside the schema, incomplete (channel, time) grids, and duplicated cells.
void load_csv_into(Dataset& ds, const std::filesystem::path& path,
                   const ChannelSchema& schema);

/// Loads a dataset from a single CSV file or from every *.csv in a directory.
Dataset load_csv(const std::filesystem::path& path,
                 const ChannelSchema& schema = ChannelSchema{});

/// Writes one recording in the dataset CSV schema.
void save_recording_csv(const Recording& rec, const std::filesystem::path& path);

/// Writes the whole dataset into a single CSV (subject-sorted, row-major).
void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

/// Shortest-round-trip decimal rendering of a double; used by every CSV
/// writer so identical data always hashes identically.
std::string format_double(double v);

}  // namespace spikeforge
