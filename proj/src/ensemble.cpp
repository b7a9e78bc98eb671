#include "spikeforge/ensemble.hpp"

#include <algorithm>

namespace spikeforge {

namespace {

constexpr Modality kModalities[] = {Modality::kSemg, Modality::kAngle,
                                    Modality::kEnergy};

std::uint64_t hash_window(std::uint64_t seed, const MatrixRef& window)
{
    // FNV-1a over the window bytes; ties the rate-coding stream to the window
    // contents so encoding stays deterministic without positional plumbing.
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (Eigen::Index c = 0; c < window.cols(); ++c)
        for (Eigen::Index r = 0; r < window.rows(); ++r) {
            const double v = window(r, c);
            const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
            for (std::size_t b = 0; b < sizeof(double); ++b) {
                h ^= bytes[b];
                h *= 1099511628211ull;
            }
        }
    return h;
}

}  // namespace

ModalityPipeline train_pipeline(const Dataset& train, Modality modality,
                                Eigen::Index omega, Eigen::Index stride,
                                PipelineConfig cfg, std::uint64_t master_seed)
{
    const auto salt = static_cast<std::uint64_t>(modality);
    cfg.stal.seed = Rng::derive_seed(master_seed, 0x200 + salt);
    cfg.srnn.seed = Rng::derive_seed(master_seed, 0x400 + salt);

    const WindowSet ws = make_windows(train, modality, omega, stride);
    if (ws.windows.empty()) throw data_error("ensemble_train: no training windows");
    const Eigen::Index channels = ws.windows.front().values.cols();

    ModalityPipeline p;
    p.modality = modality;
    p.encoder = cfg.encoder;
    p.psi = cfg.psi;
    p.rate_seed = Rng::derive_seed(master_seed, 0x600 + salt);

    if (p.uses_stal()) {
        const StalVariant variant = cfg.encoder == EncoderKind::kStalStacked
                                        ? StalVariant::kStacked
                                        : StalVariant::kVanilla;
        std::vector<Matrix> values;
        values.reserve(ws.windows.size());
        for (const Window& w : ws.windows) values.push_back(w.values);
        p.stal = make_stal_model(variant, omega, channels, cfg.psi, cfg.hidden,
                                 cfg.stal_alpha, cfg.dropout,
                                 Rng::derive_seed(master_seed, 0x100 + salt));
        train_stal(p.stal, values, cfg.stal);
    }

    std::vector<EncodedSample> encoded;
    encoded.reserve(ws.windows.size());
    for (const Window& w : ws.windows) {
        EncodedSample s;
        s.b_hat = pipeline_encode(p, w.values);
        s.label = w.label;
        encoded.push_back(std::move(s));
    }

    const Eigen::Index d_in = srnn_input_dim(omega * channels, cfg.tau);
    p.srnn = make_srnn_model(d_in, cfg.n1, cfg.tau, cfg.beta, cfg.u_thr,
                             cfg.surrogate_alpha,
                             Rng::derive_seed(master_seed, 0x300 + salt));
    train_srnn(p.srnn, encoded, cfg.srnn);
    return p;
}

std::string to_string(EncoderKind kind)
{
    switch (kind) {
        case EncoderKind::kStalStacked: return "stal-stacked";
        case EncoderKind::kStalVanilla: return "stal-vanilla";
        case EncoderKind::kRate: return "rate";
        case EncoderKind::kLatency: return "latency";
    }
    throw std::invalid_argument("unknown encoder kind");
}

EncoderKind encoder_from_string(const std::string& name)
{
    if (name == "stal-stacked") return EncoderKind::kStalStacked;
    if (name == "stal-vanilla") return EncoderKind::kStalVanilla;
    if (name == "rate") return EncoderKind::kRate;
    if (name == "latency") return EncoderKind::kLatency;
    throw std::invalid_argument("unknown encoder '" + name + "'");
}

PipelineConfig& EnsembleConfig::pipeline(Modality m)
{
    switch (m) {
        case Modality::kSemg: return semg;
        case Modality::kAngle: return angle;
        case Modality::kEnergy: return energy;
    }
    throw std::invalid_argument("unknown modality");
}

const PipelineConfig& EnsembleConfig::pipeline(Modality m) const
{
    return const_cast<EnsembleConfig*>(this)->pipeline(m);
}

void EnsembleConfig::set_encoder(EncoderKind kind)
{
    semg.encoder = kind;
    angle.encoder = kind;
    energy.encoder = kind;
}

ModalityPipeline& EnsembleModel::pipeline(Modality m)
{
    switch (m) {
        case Modality::kSemg: return semg;
        case Modality::kAngle: return angle;
        case Modality::kEnergy: return energy;
    }
    throw std::invalid_argument("unknown modality");
}

const ModalityPipeline& EnsembleModel::pipeline(Modality m) const
{
    return const_cast<EnsembleModel*>(this)->pipeline(m);
}

const Matrix& WindowTriple::window(Modality m) const
{
    switch (m) {
        case Modality::kSemg: return semg;
        case Modality::kAngle: return angle;
        case Modality::kEnergy: return energy;
    }
    throw std::invalid_argument("unknown modality");
}

std::vector<WindowTriple> make_window_triples(const Dataset& ds, Eigen::Index omega,
                                              Eigen::Index stride)
{
    if (omega < 1 || stride < 1)
        throw std::invalid_argument("make_window_triples: omega and stride must be >= 1");
    std::vector<WindowTriple> triples;
    for (const std::string& id : ds.subjects()) {
        for (Modality m : kModalities)
            if (!ds.has(id, m))
                throw data_error("make_window_triples: subject " + id +
                                 " is missing modality " + to_string(m));
        Eigen::Index shortest = ds.recording(id, kModalities[0]).length();
        for (Modality m : kModalities)
            shortest = std::min(shortest, ds.recording(id, m).length());
        for (Eigen::Index offset = 0; offset + omega <= shortest; offset += stride) {
            WindowTriple t;
            t.subject_id = id;
            t.offset = offset;
            t.semg = ds.recording(id, Modality::kSemg).data.middleRows(offset, omega);
            t.angle = ds.recording(id, Modality::kAngle).data.middleRows(offset, omega);
            t.energy = ds.recording(id, Modality::kEnergy).data.middleRows(offset, omega);
            t.label = ds.has_label(id) ? ds.label(id) : -1;
            triples.push_back(std::move(t));
        }
    }
    return triples;
}

SpikeTrain pipeline_spikes(const ModalityPipeline& p, const MatrixRef& window)
{
    switch (p.encoder) {
        case EncoderKind::kStalStacked:
        case EncoderKind::kStalVanilla:
            return stal_forward(p.stal, window).train;
        case EncoderKind::kRate: {
            Rng rng(hash_window(p.rate_seed, window));
            return rate_encode(window, p.psi, rng);
        }
        case EncoderKind::kLatency: return latency_encode(window, p.psi);
    }
    throw std::invalid_argument("unknown encoder kind");
}

Vector pipeline_encode(const ModalityPipeline& p, const MatrixRef& window)
{
    const SpikeTrain st = pipeline_spikes(p, window);
    const double p_sum = p.uses_stal() ? p.stal.position_weight_sum()
                                       : binary_position_weights(p.psi).sum();
    return st.weighted / p_sum;
}

Vector pipeline_predict(const ModalityPipeline& p, const MatrixRef& window)
{
    const Vector b_hat = pipeline_encode(p, window);
    const SrnnOutput out = srnn_forward(p.srnn, b_hat);
    return softmax(out.logits);
}

Vector build_meta_features(const EnsembleModel& model, const WindowTriple& triple)
{
    Vector features(6);
    Eigen::Index at = 0;
    for (Modality m : kModalities) {
        const Vector probs = pipeline_predict(model.pipeline(m), triple.window(m));
        features.segment(at, 2) = probs;
        at += 2;
    }
    return features;
}

int ensemble_predict(const EnsembleModel& model, const WindowTriple& triple)
{
    return forest_predict(model.forest, build_meta_features(model, triple));
}

EnsembleModel ensemble_train(const Dataset& train, const EnsembleConfig& cfg)
{
    EnsembleModel model;
    model.omega = cfg.omega;
    model.stride = cfg.stride;
    for (Modality m : kModalities)
        model.pipeline(m) = train_pipeline(train, m, cfg.omega, cfg.stride,
                                           cfg.pipeline(m), cfg.seed);

    const std::vector<WindowTriple> triples =
        make_window_triples(train, cfg.omega, cfg.stride);
    if (triples.empty()) throw data_error("ensemble_train: no aligned window triples");

    Matrix features(static_cast<Eigen::Index>(triples.size()), 6);
    std::vector<int> labels(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (triples[i].label < 0)
            throw data_error("ensemble_train: unlabeled subject " +
                             triples[i].subject_id);
        features.row(static_cast<Eigen::Index>(i)) =
            build_meta_features(model, triples[i]).transpose();
        labels[i] = triples[i].label;
    }

    ForestConfig fc = cfg.forest;
    fc.seed = Rng::derive_seed(cfg.seed, 0x500);
    model.forest = forest_fit(features, labels, fc);
    return model;
}

}  // namespace spikeforge
