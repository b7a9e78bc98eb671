#include "spikeforge/srnn_train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace spikeforge {

std::vector<std::vector<std::size_t>> make_batches(const std::vector<int>& labels,
                                                   int batch_size, Rng& rng)
{
    if (labels.empty()) throw std::invalid_argument("make_batches: no samples");
    if (batch_size < 1) throw std::invalid_argument("make_batches: bad batch size");
    std::map<int, std::size_t> counts;
    for (int y : labels) ++counts[y];
    if (counts.size() < 2)
        throw std::invalid_argument("make_batches: need both classes present");

    std::vector<double> weights(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        weights[i] = 1.0 / static_cast<double>(counts[labels[i]]);
    const std::vector<double> cumulative = cumulative_weights(weights);

    const std::size_t n_batches =
        (labels.size() + static_cast<std::size_t>(batch_size) - 1) /
        static_cast<std::size_t>(batch_size);
    std::vector<std::vector<std::size_t>> batches(n_batches);
    for (auto& batch : batches) {
        batch.resize(static_cast<std::size_t>(batch_size));
        for (auto& idx : batch) idx = rng.weighted_index(cumulative);
    }
    return batches;
}

double srnn_loss_grads(const SrnnModel& model, const MatrixRef& steps, int label,
                       SpikeMode mode, std::vector<Matrix>* grads, int* predicted)
{
    const SrnnTrace tr = srnn_trace(model, steps, mode);
    const double loss = cross_entropy(tr.logits, label);
    if (predicted) *predicted = argmax_class(tr.logits);
    if (!grads) return loss;
    if (grads->size() != 4)
        throw shape_error("srnn_loss_grads: expected 4 gradient blocks");

    Matrix& g_in = (*grads)[0];
    Matrix& g_12 = (*grads)[1];
    Matrix& g_rec1 = (*grads)[2];
    Matrix& g_rec2 = (*grads)[3];

    const Vector g = cross_entropy_grad(tr.logits, label);
    Vector a1_next = Vector::Zero(model.n1);
    Vector a2_next = Vector::Zero(SrnnModel::kClasses);

    for (int t = model.tau - 1; t >= 0; --t) {
        Vector sg2(SrnnModel::kClasses);
        for (Eigen::Index i = 0; i < SrnnModel::kClasses; ++i)
            sg2(i) = surrogate_grad(tr.u2(i, t) - model.u_thr, model.surrogate_alpha);
        const Vector ds2 =
            g + model.w_rec2.transpose() * a2_next - model.u_thr * a2_next;
        const Vector a2 = g + model.beta * a2_next + sg2.cwiseProduct(ds2);

        Vector sg1(model.n1);
        for (Eigen::Index i = 0; i < model.n1; ++i)
            sg1(i) = surrogate_grad(tr.u1(i, t) - model.u_thr, model.surrogate_alpha);
        const Vector ds1 = model.w_12.transpose() * a2 +
                           model.w_rec1.transpose() * a1_next -
                           model.u_thr * a1_next;
        const Vector a1 = model.beta * a1_next + sg1.cwiseProduct(ds1);

        g_12 += a2 * tr.s1.col(t).transpose();
        g_in += a1 * tr.x.col(t).transpose();
        if (t > 0) {
            g_rec2 += a2 * tr.s2.col(t - 1).transpose();
            g_rec1 += a1 * tr.s1.col(t - 1).transpose();
        }
        a2_next = a2;
        a1_next = a1;
    }
    return loss;
}

void register_srnn_params(SrnnModel& model, AdamW& opt)
{
    opt.add_param(&model.w_in, true);
    opt.add_param(&model.w_12, true);
    opt.add_param(&model.w_rec1, true);
    opt.add_param(&model.w_rec2, true);
}

SrnnTrainResult train_srnn(SrnnModel& model, const std::vector<EncodedSample>& samples,
                           const SrnnTrainConfig& cfg)
{
    if (samples.empty()) throw std::invalid_argument("train_srnn: no samples");
    model.check();

    std::vector<int> labels(samples.size());
    std::vector<Matrix> steps(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        labels[i] = samples[i].label;
        steps[i] = adapt_input(samples[i].b_hat, model.tau);
        if (steps[i].rows() != model.d_in)
            throw shape_error("train_srnn: sample length incompatible with d_in");
    }

    Rng rng(cfg.seed);
    AdamWConfig oc;
    oc.lr = cfg.lr;
    oc.weight_decay = cfg.weight_decay;
    AdamW opt(oc);
    register_srnn_params(model, opt);

    SrnnTrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    SrnnModel best = model;
    int stall = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto batches = make_batches(labels, cfg.batch_size, rng);
        double epoch_loss = 0.0;
        std::size_t correct = 0;
        std::size_t seen = 0;
        for (const auto& batch : batches) {
            std::vector<Matrix> grads = opt.make_grads();
            for (std::size_t idx : batch) {
                int predicted = 0;
                epoch_loss += srnn_loss_grads(model, steps[idx], labels[idx],
                                              SpikeMode::kHard, &grads, &predicted);
                if (predicted == labels[idx]) ++correct;
                ++seen;
            }
            for (Matrix& gm : grads) gm /= static_cast<double>(batch.size());
            opt.step(grads);
        }

        SrnnEpochStats stats;
        stats.loss = epoch_loss / static_cast<double>(seen);
        stats.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        result.history.push_back(stats);
        result.epochs_run = epoch + 1;

        if (stats.loss < result.best_loss - cfg.min_delta) {
            result.best_loss = stats.loss;
            result.best_epoch = epoch;
            best = model;
            stall = 0;
        } else if (++stall >= cfg.patience) {
            break;
        }
    }

    model = std::move(best);
    return result;
}

}  // namespace spikeforge
