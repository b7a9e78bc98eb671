#include "doctest.h"

#include <string>
#include <vector>

#include "spikeforge/ensemble.hpp"
#include "spikeforge/synth.hpp"

using namespace spikeforge;

namespace {

Recording make_recording(const std::string& id, Modality m, Eigen::Index len,
                         Eigen::Index channels, int pain, std::uint64_t seed)
{
    Recording rec;
    rec.subject_id = id;
    rec.modality = m;
    rec.pain_intensity = pain;
    Rng rng(seed);
    rec.data.resize(len, channels);
    for (Eigen::Index c = 0; c < channels; ++c)
        for (Eigen::Index t = 0; t < len; ++t) rec.data(t, c) = rng.uniform();
    return rec;
}

EnsembleConfig tiny_config(std::uint64_t seed)
{
    EnsembleConfig cfg;
    cfg.omega = 20;
    cfg.stride = 20;
    cfg.seed = seed;
    for (Modality m : {Modality::kSemg, Modality::kAngle, Modality::kEnergy}) {
        PipelineConfig& p = cfg.pipeline(m);
        p.psi = 3;
        p.hidden = 8;
        p.stal.epochs = 2;
        p.stal.batch_size = 8;
        p.n1 = 8;
        p.tau = 5;
        p.srnn.epochs = 2;
        p.srnn.batch_size = 8;
    }
    cfg.forest.n_trees = 11;
    cfg.forest.max_depth = 2;
    return cfg;
}

}  // namespace

TEST_CASE("encoder names round-trip")
{
    for (EncoderKind k : {EncoderKind::kStalStacked, EncoderKind::kStalVanilla,
                          EncoderKind::kRate, EncoderKind::kLatency})
        CHECK(encoder_from_string(to_string(k)) == k);
    CHECK(to_string(EncoderKind::kStalStacked) == "stal-stacked");
    CHECK(to_string(EncoderKind::kRate) == "rate");
    CHECK_THROWS_AS(encoder_from_string("poisson"), std::invalid_argument);
}

TEST_CASE("config accessors address the per-modality streams")
{
    EnsembleConfig cfg;
    cfg.semg.psi = 2;
    cfg.angle.psi = 3;
    cfg.energy.psi = 4;
    CHECK(cfg.pipeline(Modality::kSemg).psi == 2);
    CHECK(cfg.pipeline(Modality::kAngle).psi == 3);
    CHECK(cfg.pipeline(Modality::kEnergy).psi == 4);

    cfg.set_encoder(EncoderKind::kLatency);
    CHECK(cfg.semg.encoder == EncoderKind::kLatency);
    CHECK(cfg.angle.encoder == EncoderKind::kLatency);
    CHECK(cfg.energy.encoder == EncoderKind::kLatency);
}

TEST_CASE("window triples align offsets across modalities")
{
    Dataset ds;
    ds.add(make_recording("A", Modality::kSemg, 10, 2, 7, 1));
    ds.add(make_recording("A", Modality::kAngle, 12, 3, 7, 2));
    ds.add(make_recording("A", Modality::kEnergy, 11, 3, 7, 3));
    ds.add(make_recording("B", Modality::kSemg, 9, 2, 3, 4));
    ds.add(make_recording("B", Modality::kAngle, 9, 3, 3, 5));
    ds.add(make_recording("B", Modality::kEnergy, 9, 3, 3, 6));

    const auto triples = make_window_triples(ds, 4, 3);
    // A: shortest modality has 10 frames -> offsets 0, 3, 6. B: 9 -> 0, 3.
    REQUIRE(triples.size() == 5);
    CHECK(triples[0].subject_id == "A");
    CHECK(triples[0].offset == 0);
    CHECK(triples[1].offset == 3);
    CHECK(triples[2].offset == 6);
    CHECK(triples[3].subject_id == "B");
    CHECK(triples[3].offset == 0);
    CHECK(triples[4].offset == 3);

    for (const auto& t : triples) {
        CHECK(t.semg.rows() == 4);
        CHECK(t.angle.rows() == 4);
        CHECK(t.energy.rows() == 4);
        CHECK(t.semg.cols() == 2);
        CHECK(t.angle.cols() == 3);
        CHECK(t.label == (t.subject_id == "A" ? 1 : 0));
    }

    const Recording& semg_a = ds.recording("A", Modality::kSemg);
    CHECK(triples[1].semg == semg_a.data.middleRows(3, 4));
    CHECK(triples[1].window(Modality::kSemg) == triples[1].semg);
    CHECK(triples[1].window(Modality::kAngle) == triples[1].angle);
    CHECK(triples[1].window(Modality::kEnergy) == triples[1].energy);

    CHECK_THROWS_AS(make_window_triples(ds, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_window_triples(ds, 4, 0), std::invalid_argument);

    Dataset incomplete;
    incomplete.add(make_recording("C", Modality::kSemg, 9, 2, 7, 7));
    CHECK_THROWS_AS(make_window_triples(incomplete, 4, 3), data_error);
}

TEST_CASE("rate pipelines derive their stream from the window contents")
{
    ModalityPipeline p;
    p.encoder = EncoderKind::kRate;
    p.psi = 5;
    p.rate_seed = 42;

    Rng rng(90);
    Matrix window(20, 4);
    for (Eigen::Index c = 0; c < 4; ++c)
        for (Eigen::Index t = 0; t < 20; ++t) window(t, c) = rng.uniform();

    const SpikeTrain a = pipeline_spikes(p, window);
    const SpikeTrain b = pipeline_spikes(p, window);
    CHECK(a.spikes == b.spikes);
    CHECK(a.weighted == b.weighted);

    Matrix other = window;
    other(0, 0) = 1.0 - other(0, 0);
    CHECK(pipeline_spikes(p, other).spikes != a.spikes);

    ModalityPipeline reseeded = p;
    reseeded.rate_seed = 43;
    CHECK(pipeline_spikes(reseeded, window).spikes != a.spikes);

    const Vector b_hat = pipeline_encode(p, window);
    CHECK(b_hat.size() == 80);
    CHECK(b_hat.minCoeff() >= 0.0);
    CHECK(b_hat.maxCoeff() <= 1.0);
}

TEST_CASE("latency and STAL pipelines reuse the plain encoders")
{
    Rng rng(91);
    Matrix window(6, 2);
    for (Eigen::Index c = 0; c < 2; ++c)
        for (Eigen::Index t = 0; t < 6; ++t) window(t, c) = rng.uniform();

    ModalityPipeline lat;
    lat.encoder = EncoderKind::kLatency;
    lat.psi = 5;
    const SpikeTrain lt = pipeline_spikes(lat, window);
    CHECK(lt.spikes == latency_encode(window, 5).spikes);
    const Vector lat_hat = pipeline_encode(lat, window);
    CHECK(lat_hat == (lt.weighted / 31.0).eval());

    ModalityPipeline stal;
    stal.encoder = EncoderKind::kStalVanilla;
    stal.stal = make_stal_model(StalVariant::kVanilla, 6, 2, 3, 0, 25.0, 0.5, 92);
    const SpikeTrain st = pipeline_spikes(stal, window);
    const StalActivations direct = stal_forward(stal.stal, window);
    CHECK(st.spikes == direct.train.spikes);
    CHECK(st.weighted == direct.train.weighted);
    CHECK(pipeline_encode(stal, window) ==
          (direct.train.weighted / stal.stal.position_weight_sum()).eval());
}

TEST_CASE("hand-wired pipeline votes for class 1")
{
    ModalityPipeline p;
    p.encoder = EncoderKind::kLatency;
    p.psi = 2;

    SrnnModel m;
    m.d_in = 2;
    m.n1 = 2;
    m.tau = 1;
    m.beta = 0.9;
    m.u_thr = 1.0;
    m.surrogate_alpha = 2.0;
    m.w_in = 4.0 * Matrix::Identity(2, 2);
    m.w_12 = Matrix::Zero(2, 2);
    m.w_12(1, 0) = 3.0;
    m.w_12(1, 1) = 3.0;
    m.w_rec1 = Matrix::Zero(2, 2);
    m.w_rec2 = Matrix::Zero(2, 2);
    m.check();
    p.srnn = m;

    const Matrix window = Matrix::Ones(2, 1);
    const Vector probs = pipeline_predict(p, window);
    REQUIRE(probs.size() == 2);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probs(1) > 0.5);
}

TEST_CASE("a tiny ensemble trains end to end")
{
    const Dataset raw = synthesize_dataset(4, 2, 120, 9);
    const Dataset ds = preprocess(raw);
    EnsembleConfig cfg = tiny_config(10);

    const EnsembleModel model = ensemble_train(ds, cfg);
    CHECK(model.omega == 20);
    CHECK(model.stride == 20);
    CHECK(model.forest.fitted());
    CHECK(model.forest.n_features == 6);

    CHECK(model.semg.encoder == EncoderKind::kStalStacked);
    CHECK(model.semg.stal.phi.size() == 20 * 4 * 3);
    CHECK(model.angle.stal.phi.size() == 20 * 13 * 3);
    CHECK(model.semg.srnn.d_in == 16);   // ceil(20*4 / 5)
    CHECK(model.angle.srnn.d_in == 52);  // ceil(20*13 / 5)
    CHECK(model.energy.srnn.d_in == 52);

    const auto triples = make_window_triples(ds, cfg.omega, cfg.stride);
    REQUIRE(!triples.empty());
    for (std::size_t i = 0; i < 4; ++i) {
        const Vector f = build_meta_features(model, triples[i]);
        REQUIRE(f.size() == 6);
        for (int k = 0; k < 3; ++k)
            CHECK(f(2 * k) + f(2 * k + 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.segment(0, 2) ==
              pipeline_predict(model.semg, triples[i].semg));
        CHECK(f.segment(2, 2) ==
              pipeline_predict(model.angle, triples[i].angle));
        CHECK(f.segment(4, 2) ==
              pipeline_predict(model.energy, triples[i].energy));

        const int vote = ensemble_predict(model, triples[i]);
        CHECK((vote == 0 || vote == 1));
        CHECK(vote == forest_predict(model.forest, f));
    }
}

TEST_CASE("ensemble training is deterministic in the master seed")
{
    const Dataset ds = preprocess(synthesize_dataset(3, 1, 80, 11));
    EnsembleConfig cfg = tiny_config(12);
    cfg.omega = 20;
    cfg.stride = 20;

    const EnsembleModel a = ensemble_train(ds, cfg);
    const EnsembleModel b = ensemble_train(ds, cfg);
    CHECK(a.semg.stal.phi == b.semg.stal.phi);
    CHECK(a.angle.stal.w1 == b.angle.stal.w1);
    CHECK(a.semg.srnn.w_in == b.semg.srnn.w_in);
    CHECK(a.energy.srnn.w_12 == b.energy.srnn.w_12);
    REQUIRE(a.forest.trees.size() == b.forest.trees.size());
    for (std::size_t t = 0; t < a.forest.trees.size(); ++t) {
        REQUIRE(a.forest.trees[t].nodes.size() == b.forest.trees[t].nodes.size());
        for (std::size_t n = 0; n < a.forest.trees[t].nodes.size(); ++n) {
            CHECK(a.forest.trees[t].nodes[n].feature ==
                  b.forest.trees[t].nodes[n].feature);
            CHECK(a.forest.trees[t].nodes[n].threshold ==
                  b.forest.trees[t].nodes[n].threshold);
        }
    }

    EnsembleConfig other = cfg;
    other.seed = 13;
    const EnsembleModel c = ensemble_train(ds, other);
    CHECK(a.semg.stal.phi != c.semg.stal.phi);
}

TEST_CASE("rate-coded ensembles skip the STAL stage")
{
    const Dataset ds = preprocess(synthesize_dataset(3, 1, 80, 14));
    EnsembleConfig cfg = tiny_config(15);
    cfg.set_encoder(EncoderKind::kRate);

    const EnsembleModel model = ensemble_train(ds, cfg);
    CHECK(!model.semg.uses_stal());
    CHECK(model.semg.stal.phi.size() == 0);
    CHECK(model.angle.stal.phi.size() == 0);
    CHECK(model.semg.encoder == EncoderKind::kRate);
    CHECK(model.forest.fitted());

    const auto triples = make_window_triples(ds, cfg.omega, cfg.stride);
    const Vector f1 = build_meta_features(model, triples[0]);
    const Vector f2 = build_meta_features(model, triples[0]);
    CHECK(f1 == f2);
}
