#include "spikeforge/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "spikeforge/rng.hpp"

namespace spikeforge {

namespace {

using nlohmann::json;

template <typename T>
T fetch(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config key '") + key + "': " +
                                    e.what());
    }
}

}  // namespace

void RunConfig::validate() const
{
    if (profile != "desk" && profile != "paper")
        throw std::invalid_argument("config: profile must be 'desk' or 'paper'");
    encoder_from_string(encoder);  // throws on unknown names
    if (omega < 1 || stride < 1)
        throw std::invalid_argument("config: omega and stride must be >= 1");
    if (trim_threshold < 1 || trim_cut < 0)
        throw std::invalid_argument("config: bad trim settings");
    if (psi < 1) throw std::invalid_argument("config: psi must be >= 1");
    if (hidden < 0) throw std::invalid_argument("config: hidden must be >= 0");
    if (stal_alpha <= 0.0 || surrogate_alpha <= 0.0)
        throw std::invalid_argument("config: slope parameters must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw std::invalid_argument("config: dropout must lie in [0, 1)");
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (mi_bins < 2) throw std::invalid_argument("config: mi_bins must be >= 2");
    if (stal_lr <= 0.0 || srnn_lr <= 0.0)
        throw std::invalid_argument("config: learning rates must be positive");
    if (stal_epochs < 1 || srnn_epochs < 1)
        throw std::invalid_argument("config: epochs must be >= 1");
    if (stal_patience < 1 || srnn_patience < 1)
        throw std::invalid_argument("config: patience must be >= 1");
    if (stal_min_delta < 0.0 || srnn_min_delta < 0.0)
        throw std::invalid_argument("config: min_delta must be >= 0");
    if (n1 < 1) throw std::invalid_argument("config: n1 must be >= 1");
    if (tau < 1) throw std::invalid_argument("config: tau must be >= 1");
    if (beta <= 0.0 || beta >= 1.0)
        throw std::invalid_argument("config: beta must lie in (0, 1)");
    if (u_thr <= 0.0) throw std::invalid_argument("config: u_thr must be positive");
    if (weight_decay < 0.0)
        throw std::invalid_argument("config: weight_decay must be >= 0");
    if (batch_semg < 1 || batch_angle < 1 || batch_energy < 1)
        throw std::invalid_argument("config: batch sizes must be >= 1");
    if (n_trees < 1 || max_depth < 0)
        throw std::invalid_argument("config: bad forest settings");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
}

EnsembleConfig RunConfig::ensemble_config() const
{
    validate();
    EnsembleConfig ec;
    ec.omega = omega;
    ec.stride = stride;
    ec.seed = seed;
    ec.forest.n_trees = n_trees;
    ec.forest.max_depth = max_depth;

    const EncoderKind kind = encoder_from_string(encoder);
    for (Modality m : {Modality::kSemg, Modality::kAngle, Modality::kEnergy}) {
        PipelineConfig& p = ec.pipeline(m);
        p.encoder = kind;
        p.psi = psi;
        p.hidden = hidden;
        p.stal_alpha = stal_alpha;
        p.dropout = dropout;
        p.stal.lambda = lambda;
        p.stal.lr = stal_lr;
        p.stal.weight_decay = weight_decay;
        p.stal.epochs = stal_epochs;
        p.stal.patience = stal_patience;
        p.stal.min_delta = stal_min_delta;
        p.stal.mi.n_bins = mi_bins;
        p.n1 = n1;
        p.tau = tau;
        p.beta = beta;
        p.u_thr = u_thr;
        p.surrogate_alpha = surrogate_alpha;
        p.srnn.lr = srnn_lr;
        p.srnn.weight_decay = weight_decay;
        p.srnn.epochs = srnn_epochs;
        p.srnn.patience = srnn_patience;
        p.srnn.min_delta = srnn_min_delta;
    }
    ec.semg.stal.batch_size = batch_semg;
    ec.semg.srnn.batch_size = batch_semg;
    ec.angle.stal.batch_size = batch_angle;
    ec.angle.srnn.batch_size = batch_angle;
    ec.energy.stal.batch_size = batch_energy;
    ec.energy.srnn.batch_size = batch_energy;
    return ec;
}

std::string RunConfig::resolved_json() const
{
    json j;
    j["profile"] = profile;
    j["omega"] = omega;
    j["stride"] = stride;
    j["trim_threshold"] = trim_threshold;
    j["trim_cut"] = trim_cut;
    j["encoder"] = encoder;
    j["psi"] = psi;
    j["hidden"] = hidden;
    j["stal_alpha"] = stal_alpha;
    j["dropout"] = dropout;
    j["lambda"] = lambda;
    j["mi_bins"] = mi_bins;
    j["stal_lr"] = stal_lr;
    j["stal_epochs"] = stal_epochs;
    j["stal_patience"] = stal_patience;
    j["stal_min_delta"] = stal_min_delta;
    j["n1"] = n1;
    j["tau"] = tau;
    j["beta"] = beta;
    j["u_thr"] = u_thr;
    j["surrogate_alpha"] = surrogate_alpha;
    j["srnn_lr"] = srnn_lr;
    j["srnn_epochs"] = srnn_epochs;
    j["srnn_patience"] = srnn_patience;
    j["srnn_min_delta"] = srnn_min_delta;
    j["weight_decay"] = weight_decay;
    j["batch_semg"] = batch_semg;
    j["batch_angle"] = batch_angle;
    j["batch_energy"] = batch_energy;
    j["n_trees"] = n_trees;
    j["max_depth"] = max_depth;
    j["seed"] = seed;
    j["workers"] = workers;
    return j.dump(2);
}

std::string RunConfig::digest() const
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(resolved_json())));
    return buf;
}

RunConfig profile_defaults(const std::string& profile)
{
    RunConfig cfg;
    cfg.profile = profile;
    if (profile == "desk") {
        cfg.omega = 50;
        cfg.stride = 50;
        cfg.n1 = 64;
        cfg.stal_epochs = 12;
        cfg.srnn_epochs = 20;
    } else if (profile == "paper") {
        cfg.omega = 3000;
        cfg.stride = 3000;
        cfg.n1 = 500;
        cfg.stal_epochs = 30;
        cfg.srnn_epochs = 25;
    } else {
        throw std::invalid_argument("unknown profile '" + profile +
                                    "', expected 'desk' or 'paper'");
    }
    return cfg;
}

void apply_config_text(RunConfig& cfg, const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

    if (j.contains("profile"))
        cfg = profile_defaults(fetch<std::string>(j, "profile"));

    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key == "profile") continue;  // handled above
        if (key == "omega") cfg.omega = fetch<Eigen::Index>(j, "omega");
        else if (key == "stride") cfg.stride = fetch<Eigen::Index>(j, "stride");
        else if (key == "trim_threshold")
            cfg.trim_threshold = fetch<Eigen::Index>(j, "trim_threshold");
        else if (key == "trim_cut") cfg.trim_cut = fetch<Eigen::Index>(j, "trim_cut");
        else if (key == "encoder") cfg.encoder = fetch<std::string>(j, "encoder");
        else if (key == "psi") cfg.psi = fetch<int>(j, "psi");
        else if (key == "hidden") cfg.hidden = fetch<Eigen::Index>(j, "hidden");
        else if (key == "stal_alpha") cfg.stal_alpha = fetch<double>(j, "stal_alpha");
        else if (key == "dropout") cfg.dropout = fetch<double>(j, "dropout");
        else if (key == "lambda") cfg.lambda = fetch<double>(j, "lambda");
        else if (key == "mi_bins") cfg.mi_bins = fetch<int>(j, "mi_bins");
        else if (key == "stal_lr") cfg.stal_lr = fetch<double>(j, "stal_lr");
        else if (key == "stal_epochs") cfg.stal_epochs = fetch<int>(j, "stal_epochs");
        else if (key == "stal_patience")
            cfg.stal_patience = fetch<int>(j, "stal_patience");
        else if (key == "stal_min_delta")
            cfg.stal_min_delta = fetch<double>(j, "stal_min_delta");
        else if (key == "n1") cfg.n1 = fetch<Eigen::Index>(j, "n1");
        else if (key == "tau") cfg.tau = fetch<int>(j, "tau");
        else if (key == "beta") cfg.beta = fetch<double>(j, "beta");
        else if (key == "u_thr") cfg.u_thr = fetch<double>(j, "u_thr");
        else if (key == "surrogate_alpha")
            cfg.surrogate_alpha = fetch<double>(j, "surrogate_alpha");
        else if (key == "srnn_lr") cfg.srnn_lr = fetch<double>(j, "srnn_lr");
        else if (key == "srnn_epochs") cfg.srnn_epochs = fetch<int>(j, "srnn_epochs");
        else if (key == "srnn_patience")
            cfg.srnn_patience = fetch<int>(j, "srnn_patience");
        else if (key == "srnn_min_delta")
            cfg.srnn_min_delta = fetch<double>(j, "srnn_min_delta");
        else if (key == "weight_decay")
            cfg.weight_decay = fetch<double>(j, "weight_decay");
        else if (key == "batch_semg") cfg.batch_semg = fetch<int>(j, "batch_semg");
        else if (key == "batch_angle") cfg.batch_angle = fetch<int>(j, "batch_angle");
        else if (key == "batch_energy")
            cfg.batch_energy = fetch<int>(j, "batch_energy");
        else if (key == "n_trees") cfg.n_trees = fetch<int>(j, "n_trees");
        else if (key == "max_depth") cfg.max_depth = fetch<int>(j, "max_depth");
        else if (key == "seed") cfg.seed = fetch<std::uint64_t>(j, "seed");
        else if (key == "workers") cfg.workers = fetch<int>(j, "workers");
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
}

void apply_config_file(RunConfig& cfg, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    apply_config_text(cfg, text);
}

std::optional<std::uint64_t> env_seed()
{
    const char* raw = std::getenv("SPIKEFORGE_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    // strtoull skips whitespace and wraps "-3" around instead of failing, so
    // insist on a leading digit.
    if (!std::isdigit(static_cast<unsigned char>(raw[0])) || end == raw ||
        *end != '\0' || errno != 0)
        throw std::invalid_argument(
            "SPIKEFORGE_SEED must be a non-negative integer, got '" +
            std::string(raw) + "'");
    return static_cast<std::uint64_t>(v);
}

}  // namespace spikeforge
