#include "spikeforge/stal_train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikeforge {

namespace {

struct BlockCache {
    Matrix pre;     // dense output before dropout
    Matrix act;     // relu(dropout(pre))
    Matrix xhat;    // normalized activations
    Vector mean;    // batch mean of act
    Vector inv_std; // 1/sqrt(batch var + eps)
    Matrix out;     // gamma * xhat + delta
};

BlockCache block_forward(const Matrix& w, const Vector& b, BatchNorm& bn,
                         const Matrix& in, const Matrix& mask, bool update_running)
{
    const auto batch = static_cast<double>(in.cols());
    BlockCache c;
    c.pre = (w * in).colwise() + b;
    c.act = (mask.size() ? c.pre.cwiseProduct(mask) : c.pre).cwiseMax(0.0);
    c.mean = c.act.rowwise().mean();
    const Matrix centered = c.act.colwise() - c.mean;
    const Vector var = centered.array().square().rowwise().sum().matrix() / batch;
    c.inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
    c.xhat = (centered.array().colwise() * c.inv_std.array()).matrix();
    c.out = ((c.xhat.array().colwise() * bn.gamma.array()).colwise() + bn.delta.array())
                .matrix();
    if (update_running) {
        const double unbias = in.cols() > 1 ? batch / (batch - 1.0) : 1.0;
        bn.running_mean =
            (1.0 - kBatchNormMomentum) * bn.running_mean + kBatchNormMomentum * c.mean;
        bn.running_var = (1.0 - kBatchNormMomentum) * bn.running_var +
                         kBatchNormMomentum * (unbias * var);
    }
    return c;
}

// Returns d(loss)/d(in) and accumulates unscaled parameter gradients.
Matrix block_backward(const Matrix& w, const BatchNorm& bn, const Matrix& in,
                      const Matrix& mask, const BlockCache& c, const Matrix& dout,
                      Matrix& dw, Matrix& db, Matrix& dgamma, Matrix& ddelta)
{
    const auto batch = static_cast<double>(in.cols());
    ddelta.col(0) += dout.rowwise().sum();
    dgamma.col(0) += dout.cwiseProduct(c.xhat).rowwise().sum();

    const Matrix dxhat = (dout.array().colwise() * bn.gamma.array()).matrix();
    const Vector sum_dxhat = dxhat.rowwise().sum();
    const Vector sum_dxhat_xhat = dxhat.cwiseProduct(c.xhat).rowwise().sum();
    Matrix dact(dout.rows(), dout.cols());
    for (Eigen::Index i = 0; i < dout.rows(); ++i)
        dact.row(i) = ((c.inv_std(i) / batch) *
                       (batch * dxhat.row(i).array() - sum_dxhat(i) -
                        c.xhat.row(i).array() * sum_dxhat_xhat(i)))
                          .matrix();

    dact = dact.cwiseProduct((c.act.array() > 0.0).cast<double>().matrix());
    const Matrix dpre = mask.size() ? dact.cwiseProduct(mask) : dact;
    dw += dpre * in.transpose();
    db.col(0) += dpre.rowwise().sum();
    return w.transpose() * dpre;
}

}  // namespace

StalBatch make_stal_batch(const StalModel& model, const std::vector<Matrix>& windows,
                          const std::vector<std::size_t>& idx, Rng* rng)
{
    if (idx.empty()) throw std::invalid_argument("make_stal_batch: empty batch");
    StalBatch batch;
    batch.inputs.resize(model.cells(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const Matrix& w = windows.at(idx[j]);
        model.check_window(w);
        batch.inputs.col(static_cast<Eigen::Index>(j)) = flatten_time_major(w);
    }
    if (model.variant == StalVariant::kStacked && model.dropout_p > 0.0) {
        if (!rng) throw std::invalid_argument("dropout masks need an rng");
        const double keep = 1.0 - model.dropout_p;
        auto draw = [&](Matrix& m) {
            m.resize(model.hidden, batch.inputs.cols());
            for (Eigen::Index col = 0; col < m.cols(); ++col)
                for (Eigen::Index row = 0; row < m.rows(); ++row)
                    m(row, col) = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        };
        draw(batch.mask1);
        draw(batch.mask2);
    }
    return batch;
}

StalEpochStats stal_batch_loss(StalModel& model, const StalBatch& batch, double lambda,
                               const MiEstimatorConfig& mi, std::vector<Matrix>* grads,
                               bool update_running)
{
    const Eigen::Index n = model.cells();
    const Eigen::Index batch_size = batch.inputs.cols();
    const Eigen::Index psi = model.psi;
    if (batch.inputs.rows() != n) throw shape_error("stal_batch_loss: bad input rows");
    const bool stacked = model.variant == StalVariant::kStacked;
    const double p_sum = model.position_weight_sum();

    BlockCache c1, c2;
    const Matrix* z1 = &batch.inputs;
    const Matrix* z2 = &batch.inputs;
    if (stacked) {
        c1 = block_forward(model.w1, model.b1, model.bn1, batch.inputs, batch.mask1,
                           update_running);
        c2 = block_forward(model.w2, model.b2, model.bn2, c1.out, batch.mask2,
                           update_running);
        z1 = &c1.out;
        z2 = &c2.out;
    }

    StalEpochStats stats;
    Matrix dz1_mi, dz2;
    Matrix* dphi = nullptr;
    if (grads) {
        const std::size_t expected = stacked ? 9 : 1;
        if (grads->size() != expected)
            throw shape_error("stal_batch_loss: gradient block count mismatch");
        dphi = &(*grads)[stacked ? 8 : 0];
        if (stacked) {
            dz1_mi = Matrix::Zero(model.hidden, batch_size);
            dz2 = Matrix::Zero(model.hidden, batch_size);
        }
    }

    for (Eigen::Index col = 0; col < batch_size; ++col) {
        const Vector x = batch.inputs.col(col);
        const Vector a1 = stacked ? align_dims(z1->col(col), n) : Vector(x);
        const Vector a2 = stacked ? align_dims(z2->col(col), n) : Vector(x);

        // Soft spike train: sigmoid(alpha * (h - phi)) with the soft collapse
        // sum_j p_j * s_j, so the training loss stays differentiable.
        Matrix soft(n, psi);
        for (Eigen::Index cell = 0; cell < n; ++cell)
            for (Eigen::Index j = 0; j < psi; ++j) {
                const double u =
                    model.alpha * (a2(cell) - model.phi(cell * psi + j));
                soft(cell, j) = 1.0 / (1.0 + std::exp(-u));
            }
        const Vector b_soft = soft * model.position_weights;

        StalLossGrads lg;
        const StalLossResult r =
            grads ? stal_loss_with_grad(x, a1, a2, b_soft, p_sum, lambda, mi, lg)
                  : stal_loss(x, a1, a2, b_soft, p_sum, lambda, mi);
        stats.total += r.total;
        stats.l_mi += r.l_mi;
        stats.l_s += r.l_s;
        if (!grads) continue;

        Vector da2_spikes = Vector::Zero(n);
        for (Eigen::Index cell = 0; cell < n; ++cell)
            for (Eigen::Index j = 0; j < psi; ++j) {
                const double s = soft(cell, j);
                const double du =
                    lg.b_hat(cell) * model.position_weights(j) * s * (1.0 - s);
                (*dphi)(cell * psi + j, 0) += -model.alpha * du;
                da2_spikes(cell) += model.alpha * du;
            }
        if (stacked) {
            dz2.col(col) = align_dims_backward(lg.z2 + da2_spikes, model.hidden);
            dz1_mi.col(col) = align_dims_backward(lg.z1, model.hidden);
        }
    }

    if (grads && stacked) {
        Matrix dz1 = block_backward(model.w2, model.bn2, c1.out, batch.mask2, c2, dz2,
                                    (*grads)[4], (*grads)[5], (*grads)[6], (*grads)[7]);
        dz1 += dz1_mi;
        block_backward(model.w1, model.bn1, batch.inputs, batch.mask1, c1, dz1,
                       (*grads)[0], (*grads)[1], (*grads)[2], (*grads)[3]);
    }

    const auto scale = static_cast<double>(batch_size);
    stats.total /= scale;
    stats.l_mi /= scale;
    stats.l_s /= scale;
    if (grads)
        for (Matrix& g : *grads) g /= scale;
    return stats;
}

void register_stal_params(StalModel& model, AdamW& opt)
{
    if (model.variant == StalVariant::kStacked) {
        opt.add_param(&model.w1, true);
        opt.add_param(&model.b1, false);
        opt.add_param(&model.bn1.gamma, false);
        opt.add_param(&model.bn1.delta, false);
        opt.add_param(&model.w2, true);
        opt.add_param(&model.b2, false);
        opt.add_param(&model.bn2.gamma, false);
        opt.add_param(&model.bn2.delta, false);
    }
    opt.add_param(&model.phi, false);
}

StalTrainResult train_stal(StalModel& model, const std::vector<Matrix>& windows,
                           const StalTrainConfig& cfg)
{
    if (windows.empty()) throw std::invalid_argument("train_stal: no windows");
    if (cfg.batch_size < 1) throw std::invalid_argument("train_stal: bad batch size");
    cfg.mi.validate();

    Rng rng(cfg.seed);
    AdamWConfig oc;
    oc.lr = cfg.lr;
    oc.weight_decay = cfg.weight_decay;
    AdamW opt(oc);
    register_stal_params(model, opt);

    const std::size_t n_windows = windows.size();
    StalTrainResult result;
    StalModel best = model;
    result.best_loss = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(n_windows);
        StalEpochStats epoch_stats;
        std::size_t start = 0;
        while (start < n_windows) {
            std::size_t count =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      n_windows - start);
            // Avoid a trailing single-window batch: batch statistics would
            // collapse its activations to the batchnorm shift.
            if (n_windows - (start + count) == 1 && count > 1) ++count;
            const std::vector<std::size_t> idx(
                perm.begin() + static_cast<std::ptrdiff_t>(start),
                perm.begin() + static_cast<std::ptrdiff_t>(start + count));
            const StalBatch batch = make_stal_batch(model, windows, idx, &rng);
            std::vector<Matrix> grads = opt.make_grads();
            const StalEpochStats s =
                stal_batch_loss(model, batch, cfg.lambda, cfg.mi, &grads, true);
            opt.step(grads);
            const auto w = static_cast<double>(count);
            epoch_stats.total += s.total * w;
            epoch_stats.l_mi += s.l_mi * w;
            epoch_stats.l_s += s.l_s * w;
            start += count;
        }
        epoch_stats.total /= static_cast<double>(n_windows);
        epoch_stats.l_mi /= static_cast<double>(n_windows);
        epoch_stats.l_s /= static_cast<double>(n_windows);
        result.history.push_back(epoch_stats);
        result.epochs_run = epoch + 1;

        if (epoch_stats.total < result.best_loss - cfg.min_delta) {
            result.best_loss = epoch_stats.total;
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
