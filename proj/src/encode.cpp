#include "spikeforge/encode.hpp"

#include <cmath>

#include "spikeforge/stal_loss.hpp"

namespace spikeforge {

Vector flatten_time_major(const MatrixRef& window)
{
    // x_f[t*c + k]; Eigen is column-major so copy row by row.
    Vector x(window.size());
    const Eigen::Index c = window.cols();
    for (Eigen::Index t = 0; t < window.rows(); ++t)
        x.segment(t * c, c) = window.row(t).transpose();
    return x;
}

namespace {

void check_unit_range(const MatrixRef& window)
{
    if (window.minCoeff() < 0.0 || window.maxCoeff() > 1.0)
        throw std::invalid_argument("window values must lie in [0, 1]");
}

SpikeTrain finish_binary_train(Matrix spikes, const Vector& position_weights)
{
    SpikeTrain st;
    st.weighted = collapse_weighted(spikes, position_weights);
    st.soft_spikes = spikes;
    st.spikes = std::move(spikes);
    return st;
}

}  // namespace

void StalModel::check_window(const MatrixRef& window) const
{
    if (window.rows() != omega || window.cols() != channels)
        throw shape_error("window is " + std::to_string(window.rows()) + "x" +
                          std::to_string(window.cols()) + ", model expects " +
                          std::to_string(omega) + "x" + std::to_string(channels));
}

StalModel make_stal_model(StalVariant variant, Eigen::Index omega,
                          Eigen::Index channels, int psi, Eigen::Index hidden,
                          double alpha, double dropout_p, std::uint64_t seed)
{
    if (omega < 1 || channels < 1) throw std::invalid_argument("empty window shape");
    if (psi < 1) throw std::invalid_argument("psi must be >= 1");
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw std::invalid_argument("dropout_p must be in [0, 1)");

    StalModel m;
    m.variant = variant;
    m.omega = omega;
    m.channels = channels;
    m.psi = psi;
    m.alpha = alpha;
    m.dropout_p = variant == StalVariant::kVanilla ? 0.0 : dropout_p;
    m.position_weights = binary_position_weights(psi);

    const Eigen::Index input = omega * channels;
    m.hidden = hidden > 0 ? hidden : input;

    Rng rng(Rng::derive_seed(seed, 0x57a1));
    if (variant == StalVariant::kStacked) {
        auto uniform_matrix = [&rng](Eigen::Index rows, Eigen::Index cols) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
            Matrix w(rows, cols);
            for (Eigen::Index j = 0; j < cols; ++j)
                for (Eigen::Index i = 0; i < rows; ++i)
                    w(i, j) = rng.uniform(-bound, bound);
            return w;
        };
        m.w1 = uniform_matrix(m.hidden, input);
        m.b1 = Vector::Zero(m.hidden);
        m.w2 = uniform_matrix(m.hidden, m.hidden);
        m.b2 = Vector::Zero(m.hidden);
        m.bn1.init(m.hidden);
        m.bn2.init(m.hidden);
    } else {
        m.hidden = input;
    }

    m.phi = init_thresholds(input * psi, 0.0, 1.0, Rng::derive_seed(seed, 0x9b1));
    return m;
}

Vector repeat_expand(const VectorRef& z, int psi)
{
    if (psi < 1) throw std::invalid_argument("psi must be >= 1");
    Vector out(z.size() * psi);
    for (Eigen::Index i = 0; i < z.size(); ++i)
        out.segment(i * psi, psi).setConstant(z(i));
    return out;
}

Vector collapse_weighted(const MatrixRef& spikes, const VectorRef& position_weights)
{
    if (spikes.cols() != position_weights.size())
        throw shape_error("position weight count does not match spike slots");
    return spikes * position_weights;
}

Vector binary_position_weights(int psi)
{
    if (psi < 1) throw std::invalid_argument("psi must be >= 1");
    Vector p(psi);
    double w = 1.0;
    for (int j = 0; j < psi; ++j, w *= 2.0) p(j) = w;
    return p;
}

Vector init_thresholds(Eigen::Index n, double a, double b, std::uint64_t seed)
{
    if (b <= a) throw std::invalid_argument("init_thresholds requires b > a");
    Rng rng(seed);
    Vector phi(n);
    for (Eigen::Index i = 0; i < n; ++i) phi(i) = rng.uniform(a, b);
    return phi;
}

StalActivations stal_forward(const StalModel& model, const MatrixRef& window,
                             RunMode mode, Rng* rng)
{
    model.check_window(window);
    check_unit_range(window);

    StalActivations act;
    act.x_f = flatten_time_major(window);

    if (model.variant == StalVariant::kVanilla) {
        act.z1 = act.x_f;
        act.z2 = act.x_f;
    } else {
        auto block = [&](const Matrix& w, const Vector& b, const BatchNorm& bn,
                         const Vector& in) {
            Vector z = w * in + b;
            if (mode == RunMode::kTrain && model.dropout_p > 0.0) {
                if (!rng)
                    throw std::invalid_argument("train-mode stal_forward needs an rng");
                const double keep = 1.0 - model.dropout_p;
                for (Eigen::Index i = 0; i < z.size(); ++i)
                    z(i) = rng->bernoulli(keep) ? z(i) / keep : 0.0;
            }
            z = z.cwiseMax(0.0);
            // Single-window forward always normalizes with running statistics;
            // batch statistics only exist in the batched trainer.
            return ((z - bn.running_mean).array() /
                        (bn.running_var.array() + kBatchNormEps).sqrt() *
                        bn.gamma.array() +
                    bn.delta.array())
                .matrix()
                .eval();
        };
        act.z1 = block(model.w1, model.b1, model.bn1, act.x_f);
        act.z2 = block(model.w2, model.b2, model.bn2, act.z1);
    }

    const Vector aligned = model.variant == StalVariant::kVanilla
                               ? act.x_f
                               : align_dims(act.z2, model.cells());
    const Vector h = repeat_expand(aligned, model.psi);
    SpikeTrain st;
    st.soft_spikes.resize(model.cells(), model.psi);
    const Eigen::Index psi = model.psi;
    for (Eigen::Index cell = 0; cell < model.cells(); ++cell)
        for (Eigen::Index j = 0; j < psi; ++j) {
            const double u = model.alpha * (h(cell * psi + j) - model.phi(cell * psi + j));
            st.soft_spikes(cell, j) = 1.0 / (1.0 + std::exp(-u));
        }
    st.spikes = (st.soft_spikes.array() >= 0.5).cast<double>().matrix();
    st.weighted = collapse_weighted(st.spikes, model.position_weights);
    act.train = std::move(st);
    return act;
}

SpikeTrain rate_encode(const MatrixRef& window, int psi, Rng& rng)
{
    if (psi < 1) throw std::invalid_argument("psi must be >= 1");
    check_unit_range(window);
    const Vector x = flatten_time_major(window);
    Matrix spikes(x.size(), psi);
    for (Eigen::Index cell = 0; cell < x.size(); ++cell)
        for (int j = 0; j < psi; ++j)
            spikes(cell, j) = rng.bernoulli(x(cell)) ? 1.0 : 0.0;
    return finish_binary_train(std::move(spikes), binary_position_weights(psi));
}

SpikeTrain latency_encode(const MatrixRef& window, int psi)
{
    if (psi < 1) throw std::invalid_argument("psi must be >= 1");
    check_unit_range(window);
    const Vector x = flatten_time_major(window);
    Matrix spikes = Matrix::Zero(x.size(), psi);
    for (Eigen::Index cell = 0; cell < x.size(); ++cell) {
        const auto slot = static_cast<Eigen::Index>(
            std::lround((1.0 - x(cell)) * (psi - 1)));
        spikes(cell, slot) = 1.0;
    }
    return finish_binary_train(std::move(spikes), binary_position_weights(psi));
}

}  // namespace spikeforge
