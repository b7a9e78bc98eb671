#include "spikeforge/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

namespace spikeforge {

namespace {

constexpr const char* kHeader =
    "subject_id,modality,channel_index,time_index,value,pain_intensity";

struct Cell {
    std::string subject;
    Modality modality;
    int channel;
    long time;
    double value;
    std::optional<int> pain;
};

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& what)
{
    throw data_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

long parse_long(const std::string& s, bool& ok)
{
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    ok = (ec == std::errc{} && p == s.data() + s.size());
    return v;
}

double parse_double(const std::string& s, bool& ok)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    ok = (end == s.c_str() + s.size() && !s.empty());
    return v;
}

}  // namespace

std::string format_double(double v)
{
    char buf[32];
    // Shortest representation that round-trips; try increasing precision.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void load_csv_into(Dataset& ds, const std::filesystem::path& path,
                   const ChannelSchema& schema)
{
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail(path, 1, "empty file");
    ++line_no;
    if (split_fields(line) != split_fields(kHeader))
        fail(path, line_no, "bad header, expected '" + std::string(kHeader) + "'");

    // (subject, modality) -> cells, plus a duplicate guard.
    std::map<std::pair<std::string, Modality>, std::vector<Cell>> groups;
    std::set<std::tuple<std::string, int, int, long>> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 6) fail(path, line_no, "expected 6 fields, got " +
                                                   std::to_string(f.size()));
        Cell cell;
        cell.subject = f[0];
        if (cell.subject.empty()) fail(path, line_no, "empty subject_id");
        try {
            cell.modality = modality_from_string(f[1]);
        } catch (const std::invalid_argument& e) {
            fail(path, line_no, e.what());
        }
        bool ok = false;
        cell.channel = static_cast<int>(parse_long(f[2], ok));
        if (!ok || cell.channel < 0) fail(path, line_no, "bad channel_index '" + f[2] + "'");
        cell.time = parse_long(f[3], ok);
        if (!ok || cell.time < 0) fail(path, line_no, "bad time_index '" + f[3] + "'");
        cell.value = parse_double(f[4], ok);
        if (!ok || !std::isfinite(cell.value))
            fail(path, line_no, "bad value '" + f[4] + "'");
        if (!f[5].empty()) {
            const long p = parse_long(f[5], ok);
            if (!ok || p < 0 || p > 10)
                fail(path, line_no, "bad pain_intensity '" + f[5] + "'");
            cell.pain = static_cast<int>(p);
        }
        const int n_channels = schema.channels(cell.modality);
        if (cell.channel >= n_channels)
            fail(path, line_no,
                 std::string("channel ") + std::to_string(cell.channel) +
                     " outside schema for " + to_string(cell.modality) + " (" +
                     std::to_string(n_channels) + " channels)");
        if (!seen.insert({cell.subject, static_cast<int>(cell.modality), cell.channel,
                          cell.time})
                 .second)
            fail(path, line_no, "duplicate (subject, modality, channel, time) cell");
        groups[{cell.subject, cell.modality}].push_back(std::move(cell));
    }

    for (auto& [key, cells] : groups) {
        const auto& [subject, modality] = key;
        const int n_channels = schema.channels(modality);
        long max_time = -1;
        std::optional<int> pain;
        for (const Cell& c : cells) {
            max_time = std::max(max_time, c.time);
            if (c.pain) {
                if (pain && *pain != *c.pain)
                    throw data_error(path.string() + ": conflicting pain_intensity for " +
                                     subject);
                pain = c.pain;
            }
        }
        const long n_time = max_time + 1;
        if (static_cast<long>(cells.size()) != n_time * n_channels)
            throw data_error(path.string() + ": incomplete grid for " + subject + "/" +
                             to_string(modality) + ": " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(n_time * n_channels));
        Recording rec;
        rec.subject_id = subject;
        rec.modality = modality;
        rec.pain_intensity = pain;
        rec.data = Matrix::Zero(n_time, n_channels);
        for (const Cell& c : cells) rec.data(c.time, c.channel) = c.value;
        ds.add(std::move(rec));
    }
}

Dataset load_csv(const std::filesystem::path& path, const ChannelSchema& schema)
{
    Dataset ds;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        if (files.empty()) throw data_error("no *.csv files in " + path.string());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_csv_into(ds, f, schema);
    } else {
        load_csv_into(ds, path, schema);
    }
    return ds;
}

namespace {

void write_recording_rows(std::ostream& out, const Recording& rec)
{
    const std::string pain =
        rec.pain_intensity ? std::to_string(*rec.pain_intensity) : std::string();
    for (Eigen::Index t = 0; t < rec.length(); ++t)
        for (Eigen::Index ch = 0; ch < rec.channels(); ++ch)
            out << rec.subject_id << ',' << to_string(rec.modality) << ',' << ch << ','
                << t << ',' << format_double(rec.data(t, ch)) << ',' << pain << '\n';
}

}  // namespace

void save_recording_csv(const Recording& rec, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << kHeader << '\n';
    write_recording_rows(out, rec);
}

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << kHeader << '\n';
    ds.for_each_recording([&](const Recording& rec) { write_recording_rows(out, rec); });
}

}  // namespace spikeforge
