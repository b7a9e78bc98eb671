#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikeforge/config.hpp"
#include "spikeforge/csv.hpp"
#include "spikeforge/loso.hpp"
#include "spikeforge/serialize.hpp"
#include "spikeforge/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spikeforge;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string profile;
    std::string seed_text;
    std::string encoder;
    int workers = 0;
    std::string out = "runs";
    std::string run_dir;
};

void add_global_opts(CLI::App* cmd, GlobalOpts& g)
{
    cmd->add_option("--config", g.config_path, "JSON config file");
    cmd->add_option("--profile", g.profile, "'desk' or 'paper' defaults");
    cmd->add_option("--seed", g.seed_text, "master seed (beats SPIKEFORGE_SEED)");
    cmd->add_option("--encoder", g.encoder,
                    "stal-stacked, stal-vanilla, rate or latency");
    cmd->add_option("--workers", g.workers, "parallel fold workers");
    cmd->add_option("-o,--out", g.out, "parent directory for run outputs");
    cmd->add_option("--run-dir", g.run_dir,
                    "reuse this exact run directory instead of a new one");
}

std::uint64_t parse_seed(const std::string& text)
{
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (!std::isdigit(static_cast<unsigned char>(text[0])) || end == text.c_str() ||
        *end != '\0' || errno != 0)
        throw std::invalid_argument("--seed must be a non-negative integer, got '" +
                                    text + "'");
    return static_cast<std::uint64_t>(v);
}

RunConfig resolve_config(const GlobalOpts& g)
{
    RunConfig cfg = profile_defaults(g.profile.empty() ? "desk" : g.profile);
    if (!g.config_path.empty()) {
        if (g.profile.empty()) {
            apply_config_file(cfg, g.config_path);
        } else {
            // The --profile flag outranks a profile key in the file.
            std::ifstream in(g.config_path);
            if (!in)
                throw std::invalid_argument("cannot open config file " +
                                            g.config_path);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            json j;
            try {
                j = json::parse(text);
            } catch (const std::exception& e) {
                throw std::invalid_argument(
                    std::string("config is not valid JSON: ") + e.what());
            }
            if (j.is_object()) j.erase("profile");
            apply_config_text(cfg, j.dump());
        }
    }
    if (const auto env = env_seed()) cfg.seed = *env;
    if (!g.seed_text.empty()) cfg.seed = parse_seed(g.seed_text);
    if (!g.encoder.empty()) cfg.encoder = g.encoder;
    if (g.workers > 0) cfg.workers = g.workers;
    cfg.validate();
    return cfg;
}

std::string utc_stamp()
{
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::ofstream g_run_log;

fs::path make_run_dir(const GlobalOpts& g, const RunConfig& cfg)
{
    fs::path dir;
    if (!g.run_dir.empty()) {
        dir = g.run_dir;
    } else {
        const std::string base = utc_stamp() + "-" + cfg.digest();
        dir = fs::path(g.out) / base;
        // Same second, same config: pick a fresh directory anyway.
        for (int k = 2; fs::exists(dir); ++k)
            dir = fs::path(g.out) / (base + "-" + std::to_string(k));
    }
    fs::create_directories(dir);

    std::ofstream out(dir / "resolved_config.json");
    if (!out) throw state_error("cannot write " + (dir / "resolved_config.json").string());
    out << cfg.resolved_json() << '\n';

    g_run_log.open(dir / "run.log", std::ios::app);
    set_warning_sink([](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
        if (g_run_log) g_run_log << "warning: " << msg << '\n';
    });

    std::cout << "run directory: " << dir.string() << '\n';
    std::cout << "config digest: " << cfg.digest() << '\n';
    return dir;
}

void stamp_digest(const fs::path& path, const std::string& digest)
{
    std::ifstream in(path);
    if (!in) throw state_error("cannot open " + path.string());
    json j = json::parse(in);
    in.close();
    j["config_digest"] = digest;
    std::ofstream out(path);
    if (!out) throw state_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_json_file(const json& j, const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw state_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& data_path)
{
    if (data_path.empty())
        throw std::invalid_argument("--data is required for this command");
    return load_csv(data_path);
}

constexpr Modality kModalities[] = {Modality::kSemg, Modality::kAngle,
                                    Modality::kEnergy};

int cmd_synth(const GlobalOpts& g, int subjects, int positive, Eigen::Index len)
{
    const RunConfig cfg = resolve_config(g);
    const Dataset ds = synthesize_dataset(subjects, positive, len, cfg.seed);
    const fs::path dir = make_run_dir(g, cfg);

    std::vector<std::string> files;
    ds.for_each_recording([&](const Recording& rec) {
        const std::string name =
            rec.subject_id + "_" + to_string(rec.modality) + ".csv";
        save_recording_csv(rec, dir / name);
        files.push_back(name);
    });

    json manifest;
    manifest["format"] = "spikeforge-dataset";
    manifest["version"] = 1;
    manifest["seed"] = cfg.seed;
    manifest["subjects"] = subjects;
    manifest["positive"] = positive;
    manifest["length"] = len;
    manifest["files"] = files;
    manifest["config_digest"] = cfg.digest();
    write_json_file(manifest, dir / "manifest.json");

    std::cout << "wrote " << files.size() << " recordings (" << subjects
              << " subjects, " << positive << " CLBP)\n";
    return 0;
}

int cmd_ingest(const GlobalOpts& g, const std::string& data_path)
{
    const RunConfig cfg = resolve_config(g);
    const Dataset ds = load_dataset(data_path);
    ds.validate_complete();
    const fs::path dir = make_run_dir(g, cfg);

    save_dataset_csv(ds, dir / "dataset.csv");

    int positive = 0;
    for (const auto& [subject, label] : ds.labels()) positive += label == 1 ? 1 : 0;
    json manifest;
    manifest["format"] = "spikeforge-dataset";
    manifest["version"] = 1;
    manifest["source"] = data_path;
    manifest["subjects"] = ds.subjects().size();
    manifest["recordings"] = ds.recording_count();
    manifest["positive"] = positive;
    manifest["config_digest"] = cfg.digest();
    write_json_file(manifest, dir / "manifest.json");

    std::cout << "ingested " << ds.recording_count() << " recordings from "
              << ds.subjects().size() << " subjects (" << positive << " CLBP)\n";
    return 0;
}

int cmd_train_stal(const GlobalOpts& g, const std::string& data_path)
{
    const RunConfig cfg = resolve_config(g);
    const EncoderKind kind = encoder_from_string(cfg.encoder);
    if (kind != EncoderKind::kStalStacked && kind != EncoderKind::kStalVanilla)
        throw std::invalid_argument("train-stal needs a STAL encoder, got '" +
                                    cfg.encoder + "'");
    const StalVariant variant = kind == EncoderKind::kStalStacked
                                    ? StalVariant::kStacked
                                    : StalVariant::kVanilla;

    const Dataset ds =
        preprocess(load_dataset(data_path), cfg.trim_threshold, cfg.trim_cut);
    const EnsembleConfig ec = cfg.ensemble_config();
    const fs::path dir = make_run_dir(g, cfg);

    json summary;
    summary["format"] = "spikeforge-summary";
    summary["command"] = "train-stal";
    summary["config_digest"] = cfg.digest();
    for (Modality m : kModalities) {
        const auto salt = static_cast<std::uint64_t>(m);
        PipelineConfig pc = ec.pipeline(m);
        pc.stal.seed = Rng::derive_seed(cfg.seed, 0x200 + salt);

        const WindowSet ws = make_windows(ds, m, ec.omega, ec.stride);
        if (ws.windows.empty()) throw data_error("train-stal: no training windows");
        std::vector<Matrix> values;
        values.reserve(ws.windows.size());
        for (const Window& w : ws.windows) values.push_back(w.values);
        const Eigen::Index channels = values.front().cols();

        StalModel model = make_stal_model(variant, ec.omega, channels, pc.psi,
                                          pc.hidden, pc.stal_alpha, pc.dropout,
                                          Rng::derive_seed(cfg.seed, 0x100 + salt));
        const StalTrainResult result = train_stal(model, values, pc.stal);

        double density = 0.0;
        for (const Matrix& w : values)
            density += spike_density(stal_forward(model, w).train.spikes);
        density /= static_cast<double>(values.size());

        const fs::path path = dir / ("stal_" + std::string(to_string(m)) + ".json");
        save_stal_model(model, path.string());
        stamp_digest(path, cfg.digest());

        json row;
        row["windows"] = values.size();
        row["epochs_run"] = result.epochs_run;
        row["best_epoch"] = result.best_epoch;
        row["best_loss"] = result.best_loss;
        row["density"] = density;
        summary[to_string(m)] = row;
        std::printf("%-7s windows %4zu  epochs %2d  best loss %.6f  density %.3f\n",
                    to_string(m), values.size(), result.epochs_run, result.best_loss,
                    density);
    }
    write_json_file(summary, dir / "train_stal.json");
    return 0;
}

int cmd_train_srnn(const GlobalOpts& g, const std::string& data_path)
{
    const RunConfig cfg = resolve_config(g);
    const Dataset ds =
        preprocess(load_dataset(data_path), cfg.trim_threshold, cfg.trim_cut);
    const EnsembleConfig ec = cfg.ensemble_config();
    const fs::path dir = make_run_dir(g, cfg);

    json summary;
    summary["format"] = "spikeforge-summary";
    summary["command"] = "train-srnn";
    summary["config_digest"] = cfg.digest();
    for (Modality m : kModalities) {
        const ModalityPipeline p =
            train_pipeline(ds, m, ec.omega, ec.stride, ec.pipeline(m), cfg.seed);
        const fs::path path = dir / pipeline_filename(m);
        save_pipeline(p, path.string());
        stamp_digest(path, cfg.digest());

        json row;
        row["d_in"] = p.srnn.d_in;
        row["n1"] = p.srnn.n1;
        row["tau"] = p.srnn.tau;
        summary[to_string(m)] = row;
        std::printf("%-7s pipeline trained (d_in %lld, n1 %lld, tau %d)\n",
                    to_string(m), static_cast<long long>(p.srnn.d_in),
                    static_cast<long long>(p.srnn.n1), p.srnn.tau);
    }
    write_json_file(summary, dir / "train_srnn.json");
    return 0;
}

int cmd_train_ensemble(const GlobalOpts& g, const std::string& data_path)
{
    const RunConfig cfg = resolve_config(g);
    const Dataset ds =
        preprocess(load_dataset(data_path), cfg.trim_threshold, cfg.trim_cut);
    const EnsembleConfig ec = cfg.ensemble_config();
    const fs::path dir = make_run_dir(g, cfg);

    const EnsembleModel model = ensemble_train(ds, ec);
    save_ensemble(model, (dir / "ensemble").string(), cfg.seed, cfg.digest());

    const auto triples = make_window_triples(ds, ec.omega, ec.stride);
    std::size_t correct = 0;
    for (const WindowTriple& t : triples)
        correct += ensemble_predict(model, t) == t.label ? 1 : 0;
    const double acc =
        static_cast<double>(correct) / static_cast<double>(triples.size());

    json summary;
    summary["format"] = "spikeforge-summary";
    summary["command"] = "train-ensemble";
    summary["config_digest"] = cfg.digest();
    summary["train_windows"] = triples.size();
    summary["train_window_accuracy"] = acc;
    write_json_file(summary, dir / "train_ensemble.json");

    std::cout << "ensemble trained on " << triples.size()
              << " window triples, training window accuracy "
              << json(acc).dump() << '\n';
    return 0;
}

int cmd_encode(const GlobalOpts& g, const std::string& data_path,
               const std::string& model_dir)
{
    const RunConfig cfg = resolve_config(g);
    const EncoderKind kind = encoder_from_string(cfg.encoder);
    const bool needs_stal =
        kind == EncoderKind::kStalStacked || kind == EncoderKind::kStalVanilla;
    if (needs_stal && model_dir.empty())
        throw state_error("encode: the " + cfg.encoder +
                          " encoder needs --model pointing at a train-stal run");

    const Dataset ds =
        preprocess(load_dataset(data_path), cfg.trim_threshold, cfg.trim_cut);
    const fs::path dir = make_run_dir(g, cfg);

    json densities;
    densities["format"] = "spikeforge-densities";
    densities["encoder"] = cfg.encoder;
    densities["config_digest"] = cfg.digest();
    double d_semg = 0.0, d_angle = 0.0, d_energy = 0.0;

    for (Modality m : kModalities) {
        const auto salt = static_cast<std::uint64_t>(m);
        ModalityPipeline p;
        p.modality = m;
        p.encoder = kind;
        p.psi = cfg.psi;
        p.rate_seed = Rng::derive_seed(cfg.seed, 0x600 + salt);
        if (needs_stal) {
            p.stal = load_stal_model(
                (fs::path(model_dir) / ("stal_" + std::string(to_string(m)) + ".json"))
                    .string());
            const bool stacked = p.stal.variant == StalVariant::kStacked;
            if (stacked != (kind == EncoderKind::kStalStacked))
                throw state_error(std::string("encode: --model holds a ") +
                                  (stacked ? "stacked" : "vanilla") +
                                  " model but --encoder is " + cfg.encoder);
            p.psi = p.stal.psi;
        }

        const WindowSet ws = make_windows(ds, m, cfg.omega, cfg.stride);
        if (ws.windows.empty()) throw data_error("encode: no windows");

        const Eigen::Index cells = ws.windows.front().values.size();
        Matrix archive(cells * p.psi,
                       static_cast<Eigen::Index>(ws.windows.size()));
        std::vector<std::string> subjects;
        std::vector<Eigen::Index> offsets;
        double density = 0.0;
        for (std::size_t i = 0; i < ws.windows.size(); ++i) {
            const SpikeTrain st = pipeline_spikes(p, ws.windows[i].values);
            density += spike_density(st.spikes);
            archive.col(static_cast<Eigen::Index>(i)) =
                st.spikes.reshaped(cells * p.psi, 1);
            subjects.push_back(ws.windows[i].subject_id);
            offsets.push_back(ws.windows[i].offset);
        }
        density /= static_cast<double>(ws.windows.size());
        if (m == Modality::kSemg) d_semg = density;
        if (m == Modality::kAngle) d_angle = density;
        if (m == Modality::kEnergy) d_energy = density;

        json arch;
        arch["format"] = "spikeforge-spikes";
        arch["version"] = 1;
        arch["modality"] = to_string(m);
        arch["encoder"] = cfg.encoder;
        arch["psi"] = p.psi;
        arch["omega"] = cfg.omega;
        arch["windows"] = ws.windows.size();
        arch["subjects"] = subjects;
        arch["offsets"] = offsets;
        arch["rows"] = archive.rows();
        arch["cols"] = archive.cols();
        arch["data"] = matrix_to_base64(archive);
        arch["config_digest"] = cfg.digest();
        write_json_file(arch, dir / ("spikes_" + std::string(to_string(m)) + ".json"));

        densities[std::string("density_") +
                  (m == Modality::kSemg    ? "semg"
                   : m == Modality::kAngle ? "angle"
                                           : "energy")] = density;
        std::printf("%-7s windows %4zu  density %.3f\n", to_string(m),
                    ws.windows.size(), density);
    }
    const double d_ens = ensemble_density(d_semg, d_angle, d_energy);
    densities["density_ensemble"] = d_ens;
    write_json_file(densities, dir / "densities.json");
    std::printf("ensemble density %.3f\n", d_ens);
    return 0;
}

int cmd_loso(const GlobalOpts& g, const std::string& data_path,
             const std::string& encoders_csv)
{
    const RunConfig base = resolve_config(g);
    const Dataset ds =
        preprocess(load_dataset(data_path), base.trim_threshold, base.trim_cut);
    const fs::path dir = make_run_dir(g, base);

    std::vector<std::string> encoders;
    if (encoders_csv.empty()) {
        encoders.push_back(base.encoder);
    } else {
        std::istringstream in(encoders_csv);
        std::string item;
        while (std::getline(in, item, ','))
            if (!item.empty()) encoders.push_back(item);
        if (encoders.empty())
            throw std::invalid_argument("--encoders lists no encoder names");
    }

    std::vector<EvalReport> reports;
    for (const std::string& enc : encoders) {
        RunConfig cfg = base;
        cfg.encoder = enc;
        cfg.validate();

        LosoConfig lc;
        lc.ensemble = cfg.ensemble_config();
        lc.workers = cfg.workers;
        lc.checkpoint_dir = (dir / ("checkpoints_" + enc)).string();
        lc.config_digest = base.digest();
        fs::create_directories(lc.checkpoint_dir);

        EvalReport report = loso_run(ds, lc);
        report.config_digest = cfg.digest();
        write_report_json(report, (dir / ("report_" + enc + ".json")).string());
        write_report_csv(report, (dir / ("report_" + enc + ".csv")).string());
        reports.push_back(std::move(report));
    }

    write_report_dat(reports, (dir / "comparison.dat").string());
    const std::string table = report_comparison_table(reports);
    {
        std::ofstream out(dir / "table.txt");
        out << table;
    }
    std::cout << table;
    return 0;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& dat_path)
{
    std::vector<EvalReport> reports;
    for (const std::string& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                const std::string name = entry.path().filename().string();
                if (name.rfind("report", 0) == 0 &&
                    entry.path().extension() == ".json")
                    found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            for (const fs::path& f : found)
                reports.push_back(read_report_json(f.string()));
        } else {
            reports.push_back(read_report_json(p));
        }
    }
    if (reports.empty()) throw state_error("report: no report files found");

    const std::string table = report_comparison_table(reports);
    std::cout << table;
    if (!dat_path.empty()) write_report_dat(reports, dat_path);
    return 0;
}

int cmd_verify(const std::string& run_dir)
{
    fs::path dir(run_dir);
    if (dir.filename().empty()) dir = dir.parent_path();  // trailing slash
    std::ifstream in(dir / "resolved_config.json");
    if (!in)
        throw state_error("verify: no resolved_config.json in " + run_dir);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    RunConfig base = profile_defaults("desk");
    apply_config_text(base, text);
    const std::string base_digest = base.digest();

    std::size_t checked = 0, drifted = 0;

    const std::string name = dir.filename().string();
    if (name.size() > 17 && name[name.size() - 17] == '-' &&
        name.find_first_not_of("0123456789abcdef", name.size() - 16) ==
            std::string::npos) {
        ++checked;
        if (name.substr(name.size() - 16) != base_digest) {
            ++drifted;
            std::cout << "DRIFT  directory name carries digest "
                      << name.substr(name.size() - 16) << ", config resolves to "
                      << base_digest << '\n';
        }
    }

    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json")
            continue;
        if (entry.path().filename() == "resolved_config.json") continue;
        json j;
        {
            std::ifstream f(entry.path());
            try {
                j = json::parse(f);
            } catch (const std::exception&) {
                ++checked;
                ++drifted;
                std::cout << "DRIFT  " << entry.path().string() << " is unreadable\n";
                continue;
            }
        }
        if (!j.is_object() || !j.contains("config_digest") ||
            !j.at("config_digest").is_string())
            continue;

        std::string expected = base_digest;
        if (j.contains("encoder") && j.at("encoder").is_string()) {
            RunConfig with_encoder = base;
            with_encoder.encoder = j.at("encoder").get<std::string>();
            expected = with_encoder.digest();
        }
        ++checked;
        const std::string found = j.at("config_digest").get<std::string>();
        if (found != expected) {
            ++drifted;
            std::cout << "DRIFT  " << entry.path().string() << " carries " << found
                      << ", expected " << expected << '\n';
        }
    }

    std::cout << "verified " << checked << " artifacts, " << drifted
              << " drifted\n";
    if (drifted > 0)
        throw state_error("verify: " + std::to_string(drifted) +
                          " artifacts do not match the resolved config");
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spike-train encoding and chronic low-back pain classification"};
    app.require_subcommand(1);

    GlobalOpts g;
    int synth_subjects = 8;
    int synth_positive = 4;
    long long synth_len = 2400;
    std::string data_path;
    std::string model_dir;
    std::string encoders_csv;
    std::vector<std::string> report_paths;
    std::string dat_path;
    std::string verify_dir;

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
    add_global_opts(synth, g);
    synth->add_option("--subjects", synth_subjects, "number of subjects");
    synth->add_option("--positive", synth_positive, "number of CLBP subjects");
    synth->add_option("--len", synth_len, "frames per recording");

    CLI::App* ingest =
        app.add_subcommand("ingest", "load a dataset CSV and canonicalize it");
    add_global_opts(ingest, g);
    ingest->add_option("--data", data_path, "CSV file or directory")->required();

    CLI::App* train_stal_cmd =
        app.add_subcommand("train-stal", "train the STAL encoders per modality");
    add_global_opts(train_stal_cmd, g);
    train_stal_cmd->add_option("--data", data_path, "CSV file or directory")
        ->required();

    CLI::App* train_srnn_cmd = app.add_subcommand(
        "train-srnn", "train encoder plus R-LIF classifier per modality");
    add_global_opts(train_srnn_cmd, g);
    train_srnn_cmd->add_option("--data", data_path, "CSV file or directory")
        ->required();

    CLI::App* train_ens = app.add_subcommand(
        "train-ensemble", "train the full three-stream ensemble");
    add_global_opts(train_ens, g);
    train_ens->add_option("--data", data_path, "CSV file or directory")->required();

    CLI::App* encode =
        app.add_subcommand("encode", "encode all windows and report densities");
    add_global_opts(encode, g);
    encode->add_option("--data", data_path, "CSV file or directory")->required();
    encode->add_option("--model", model_dir, "train-stal run with stal_<m>.json");

    CLI::App* loso = app.add_subcommand(
        "loso", "leave-one-subject-out evaluation of the ensemble");
    add_global_opts(loso, g);
    loso->add_option("--data", data_path, "CSV file or directory")->required();
    loso->add_option("--encoders", encoders_csv,
                     "comma-separated encoder list for a comparison run");

    CLI::App* report =
        app.add_subcommand("report", "print a comparison table of saved reports");
    report->add_option("paths", report_paths, "report files or run directories")
        ->required();
    report->add_option("--dat", dat_path, "also write a gnuplot data file");

    CLI::App* verify = app.add_subcommand(
        "verify", "re-hash a run directory and detect config drift");
    verify->add_option("run", verify_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed())
            return cmd_synth(g, synth_subjects, synth_positive,
                             static_cast<Eigen::Index>(synth_len));
        if (ingest->parsed()) return cmd_ingest(g, data_path);
        if (train_stal_cmd->parsed()) return cmd_train_stal(g, data_path);
        if (train_srnn_cmd->parsed()) return cmd_train_srnn(g, data_path);
        if (train_ens->parsed()) return cmd_train_ensemble(g, data_path);
        if (encode->parsed()) return cmd_encode(g, data_path, model_dir);
        if (loso->parsed()) return cmd_loso(g, data_path, encoders_csv);
        if (report->parsed()) return cmd_report(report_paths, dat_path);
        if (verify->parsed()) return cmd_verify(verify_dir);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const state_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
