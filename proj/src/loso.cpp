#include "spikeforge/loso.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace spikeforge {

namespace {

using nlohmann::json;

Dataset subset_excluding(const Dataset& ds, const std::string& held_out)
{
    Dataset out;
    ds.for_each_recording([&](const Recording& rec) {
        if (rec.subject_id != held_out) out.add(rec);
    });
    for (const auto& [id, label] : ds.labels())
        if (id != held_out) out.set_label(id, label);
    return out;
}

Dataset subset_of(const Dataset& ds, const std::string& subject)
{
    Dataset out;
    ds.for_each_recording([&](const Recording& rec) {
        if (rec.subject_id == subject) out.add(rec);
    });
    if (ds.has_label(subject)) out.set_label(subject, ds.label(subject));
    return out;
}

std::filesystem::path checkpoint_path(const LosoConfig& cfg,
                                      const std::string& subject)
{
    return std::filesystem::path(cfg.checkpoint_dir) / ("fold_" + subject + ".json");
}

json fold_to_json(const FoldOutcome& f, const LosoConfig& cfg)
{
    json j;
    j["subject_id"] = f.subject_id;
    j["truth"] = f.truth;
    j["predicted"] = f.predicted;
    j["clbp_fraction"] = f.clbp_fraction;
    j["n_windows"] = f.n_windows;
    j["correct_windows"] = f.correct_windows;
    j["density_semg"] = f.density_semg;
    j["density_angle"] = f.density_angle;
    j["density_energy"] = f.density_energy;
    j["seed"] = cfg.ensemble.seed;
    j["config_digest"] = cfg.config_digest;
    return j;
}

bool fold_from_json(const json& j, const LosoConfig& cfg, const std::string& subject,
                    FoldOutcome& out)
{
    if (j.value("config_digest", std::string()) != cfg.config_digest) return false;
    if (j.value("seed", std::uint64_t(0)) != cfg.ensemble.seed) return false;
    if (j.value("subject_id", std::string()) != subject) return false;
    out.subject_id = j.at("subject_id").get<std::string>();
    out.truth = j.at("truth").get<int>();
    out.predicted = j.at("predicted").get<int>();
    out.clbp_fraction = j.at("clbp_fraction").get<double>();
    out.n_windows = j.at("n_windows").get<std::size_t>();
    out.correct_windows = j.at("correct_windows").get<std::size_t>();
    out.density_semg = j.at("density_semg").get<double>();
    out.density_angle = j.at("density_angle").get<double>();
    out.density_energy = j.at("density_energy").get<double>();
    return true;
}

bool try_load_checkpoint(const LosoConfig& cfg, const std::string& subject,
                         FoldOutcome& out)
{
    if (cfg.checkpoint_dir.empty()) return false;
    const auto path = checkpoint_path(cfg, subject);
    std::ifstream in(path);
    if (!in) return false;
    try {
        const json j = json::parse(in);
        if (fold_from_json(j, cfg, subject, out)) return true;
        log_warning("checkpoint " + path.string() + " is stale, recomputing fold");
    } catch (const std::exception& e) {
        log_warning("checkpoint " + path.string() + " unreadable (" + e.what() +
                    "), recomputing fold");
    }
    return false;
}

void save_checkpoint(const LosoConfig& cfg, const FoldOutcome& fold)
{
    if (cfg.checkpoint_dir.empty()) return;
    std::filesystem::create_directories(cfg.checkpoint_dir);
    const auto path = checkpoint_path(cfg, fold.subject_id);
    std::ofstream out(path);
    if (!out) throw state_error("cannot write checkpoint " + path.string());
    out << fold_to_json(fold, cfg).dump(2) << '\n';
}

}  // namespace

FoldOutcome run_fold(const Dataset& ds, const std::string& held_out,
                     const LosoConfig& cfg)
{
    const Dataset train = subset_excluding(ds, held_out);
    const Dataset test = subset_of(ds, held_out);

    // Fold isolation: the held-out subject must not leak into training.
    const auto train_subjects = train.subjects();
    if (std::find(train_subjects.begin(), train_subjects.end(), held_out) !=
        train_subjects.end())
        throw state_error("fold isolation violated for subject " + held_out);
    if (train_subjects.empty())
        throw std::invalid_argument("run_fold: need at least 2 subjects");
    if (test.subjects() != std::vector<std::string>{held_out})
        throw state_error("run_fold: test split must hold exactly " + held_out);

    EnsembleConfig fold_cfg = cfg.ensemble;
    fold_cfg.seed = Rng::derive_seed(cfg.ensemble.seed, fnv1a_hash(held_out));
    const EnsembleModel model = ensemble_train(train, fold_cfg);

    const std::vector<WindowTriple> triples =
        make_window_triples(test, fold_cfg.omega, fold_cfg.stride);
    if (triples.empty())
        throw data_error("run_fold: no test windows for subject " + held_out);

    FoldOutcome fold;
    fold.subject_id = held_out;
    fold.truth = ds.label(held_out);
    fold.n_windows = triples.size();

    std::size_t votes_clbp = 0;
    double dens_semg = 0.0, dens_angle = 0.0, dens_energy = 0.0;
    for (const WindowTriple& t : triples) {
        const int pred = ensemble_predict(model, t);
        if (pred == 1) ++votes_clbp;
        if (pred == fold.truth) ++fold.correct_windows;
        dens_semg += spike_density(pipeline_spikes(model.semg, t.semg).spikes);
        dens_angle += spike_density(pipeline_spikes(model.angle, t.angle).spikes);
        dens_energy += spike_density(pipeline_spikes(model.energy, t.energy).spikes);
    }

    const auto n = static_cast<double>(triples.size());
    fold.clbp_fraction = static_cast<double>(votes_clbp) / n;
    // Majority vote; exact ties go to the healthy class.
    fold.predicted = 2 * votes_clbp > triples.size() ? 1 : 0;
    fold.density_semg = dens_semg / n;
    fold.density_angle = dens_angle / n;
    fold.density_energy = dens_energy / n;
    return fold;
}

EvalReport assemble_report(const std::vector<FoldOutcome>& folds,
                           const std::string& encoder, std::uint64_t seed)
{
    if (folds.empty()) throw std::invalid_argument("assemble_report: no folds");
    EvalReport report;
    report.encoder = encoder;
    report.seed = seed;
    report.folds = folds;

    std::vector<int> pred, truth;
    std::vector<double> scores;
    std::size_t windows = 0, correct = 0;
    double dens_semg = 0.0, dens_angle = 0.0, dens_energy = 0.0;
    for (const FoldOutcome& f : folds) {
        pred.push_back(f.predicted);
        truth.push_back(f.truth);
        scores.push_back(f.clbp_fraction);
        windows += f.n_windows;
        correct += f.correct_windows;
        const auto n = static_cast<double>(f.n_windows);
        dens_semg += f.density_semg * n;
        dens_angle += f.density_angle * n;
        dens_energy += f.density_energy * n;
    }

    report.subject_metrics = compute_metrics(pred, truth, &scores);
    report.window_accuracy =
        static_cast<double>(correct) / static_cast<double>(windows);
    const auto total = static_cast<double>(windows);
    report.density_semg = dens_semg / total;
    report.density_angle = dens_angle / total;
    report.density_energy = dens_energy / total;
    report.density_ensemble =
        ensemble_density(report.density_semg, report.density_angle,
                         report.density_energy);
    return report;
}

EvalReport loso_run(const Dataset& ds, const LosoConfig& cfg)
{
    ds.validate_complete();
    const std::vector<std::string> subjects = ds.subjects();
    if (subjects.size() < 2)
        throw std::invalid_argument("loso_run: need at least 2 subjects");
    bool any_pos = false, any_neg = false;
    for (const std::string& id : subjects)
        (ds.label(id) == 1 ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg)
        throw std::invalid_argument("loso_run: both classes must be present");

    std::vector<FoldOutcome> folds(subjects.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subjects.size()) return;
            try {
                if (!try_load_checkpoint(cfg, subjects[i], folds[i])) {
                    folds[i] = run_fold(ds, subjects[i], cfg);
                    save_checkpoint(cfg, folds[i]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t width = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.workers, 1)),
                                 subjects.size()));
    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(width);
        for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::string encoder = to_string(cfg.ensemble.semg.encoder);
    if (cfg.ensemble.angle.encoder != cfg.ensemble.semg.encoder ||
        cfg.ensemble.energy.encoder != cfg.ensemble.semg.encoder)
        encoder = "mixed";
    EvalReport report = assemble_report(folds, encoder, cfg.ensemble.seed);
    report.config_digest = cfg.config_digest;
    return report;
}

}  // namespace spikeforge
