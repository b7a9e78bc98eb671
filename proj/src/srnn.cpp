#include "spikeforge/srnn.hpp"

#include <cmath>
#include <numbers>

#include "spikeforge/rng.hpp"

namespace spikeforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kProbFloor = 1e-12;

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng)
{
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    return m;
}

double spike_value(double u_minus_thr, double alpha, SpikeMode mode)
{
    if (mode == SpikeMode::kHard) return u_minus_thr > 0.0 ? 1.0 : 0.0;
    return smooth_spike(u_minus_thr, alpha);
}

}  // namespace

void SrnnModel::check() const
{
    if (d_in < 1 || n1 < 1) throw std::invalid_argument("SrnnModel: bad layer sizes");
    if (beta <= 0.0 || beta >= 1.0)
        throw std::invalid_argument("SrnnModel: beta must lie in (0, 1)");
    if (tau < 1) throw std::invalid_argument("SrnnModel: tau must be >= 1");
    if (w_in.rows() != n1 || w_in.cols() != d_in || w_12.rows() != kClasses ||
        w_12.cols() != n1 || w_rec1.rows() != n1 || w_rec1.cols() != n1 ||
        w_rec2.rows() != kClasses || w_rec2.cols() != kClasses)
        throw shape_error("SrnnModel: weight shapes inconsistent");
    if (!w_in.allFinite() || !w_12.allFinite() || !w_rec1.allFinite() ||
        !w_rec2.allFinite())
        throw std::invalid_argument("SrnnModel: non-finite weights");
}

SrnnModel make_srnn_model(Eigen::Index d_in, Eigen::Index n1, int tau, double beta,
                          double u_thr, double surrogate_alpha, std::uint64_t seed)
{
    SrnnModel m;
    m.d_in = d_in;
    m.n1 = n1;
    m.tau = tau;
    m.beta = beta;
    m.u_thr = u_thr;
    m.surrogate_alpha = surrogate_alpha;
    Rng rng(seed);
    m.w_in = uniform_matrix(n1, d_in, 1.0 / std::sqrt(static_cast<double>(d_in)), rng);
    m.w_12 = uniform_matrix(SrnnModel::kClasses, n1,
                            1.0 / std::sqrt(static_cast<double>(n1)), rng);
    m.w_rec1 = uniform_matrix(n1, n1, 1.0 / std::sqrt(static_cast<double>(n1)), rng);
    m.w_rec2 = uniform_matrix(SrnnModel::kClasses, SrnnModel::kClasses,
                              1.0 / std::sqrt(static_cast<double>(SrnnModel::kClasses)),
                              rng);
    m.check();
    return m;
}

void SrnnState::reset(const SrnnModel& model)
{
    u1 = Vector::Zero(model.n1);
    s1 = Vector::Zero(model.n1);
    u2 = Vector::Zero(SrnnModel::kClasses);
    s2 = Vector::Zero(SrnnModel::kClasses);
}

Eigen::Index srnn_input_dim(Eigen::Index flattened_len, int tau)
{
    if (tau < 1) throw std::invalid_argument("srnn_input_dim: tau must be >= 1");
    if (flattened_len < 1) throw std::invalid_argument("srnn_input_dim: empty input");
    return (flattened_len + tau - 1) / tau;
}

Matrix adapt_input(const VectorRef& b_hat, int tau, double p_sum)
{
    if (p_sum <= 0.0) throw std::invalid_argument("adapt_input: p_sum must be > 0");
    const Eigen::Index d_in = srnn_input_dim(b_hat.size(), tau);
    Matrix steps = Matrix::Zero(d_in, tau);
    for (Eigen::Index i = 0; i < b_hat.size(); ++i)
        steps(i % d_in, i / d_in) = b_hat(i) / p_sum;
    return steps;
}

void rlif_step(const SrnnModel& model, SrnnState& state, const VectorRef& x,
               SpikeMode mode)
{
    if (x.size() != model.d_in) throw shape_error("rlif_step: input length != d_in");
    state.u1 = model.beta * state.u1 + model.w_in * x + model.w_rec1 * state.s1 -
               model.u_thr * state.s1;
    for (Eigen::Index i = 0; i < model.n1; ++i)
        state.s1(i) =
            spike_value(state.u1(i) - model.u_thr, model.surrogate_alpha, mode);
    state.u2 = model.beta * state.u2 + model.w_12 * state.s1 +
               model.w_rec2 * state.s2 - model.u_thr * state.s2;
    for (Eigen::Index i = 0; i < SrnnModel::kClasses; ++i)
        state.s2(i) =
            spike_value(state.u2(i) - model.u_thr, model.surrogate_alpha, mode);
}

SrnnTrace srnn_trace(const SrnnModel& model, const MatrixRef& steps, SpikeMode mode)
{
    model.check();
    if (steps.rows() != model.d_in || steps.cols() != model.tau)
        throw shape_error("srnn_trace: adapted input must be d_in x tau");

    SrnnTrace tr;
    tr.x = steps;
    tr.u1.resize(model.n1, model.tau);
    tr.s1.resize(model.n1, model.tau);
    tr.u2.resize(SrnnModel::kClasses, model.tau);
    tr.s2.resize(SrnnModel::kClasses, model.tau);

    SrnnState state;
    state.reset(model);
    for (int t = 0; t < model.tau; ++t) {
        rlif_step(model, state, steps.col(t), mode);
        tr.u1.col(t) = state.u1;
        tr.s1.col(t) = state.s1;
        tr.u2.col(t) = state.u2;
        tr.s2.col(t) = state.s2;
    }
    tr.logits = tr.s2.rowwise().sum() + tr.u2.rowwise().sum();
    return tr;
}

SrnnOutput srnn_forward(const SrnnModel& model, const VectorRef& b_hat, double p_sum)
{
    const SrnnTrace tr = srnn_trace(model, adapt_input(b_hat, model.tau, p_sum));
    SrnnOutput out;
    out.s_out = tr.s2.transpose();
    out.u_out = tr.u2.transpose();
    out.logits = tr.logits;
    out.predicted = argmax_class(tr.logits);
    return out;
}

int argmax_class(const VectorRef& logits)
{
    int best = 0;
    for (Eigen::Index k = 1; k < logits.size(); ++k)
        if (logits(k) > logits(best)) best = static_cast<int>(k);
    return best;
}

Vector softmax(const VectorRef& logits)
{
    const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

double cross_entropy(const VectorRef& logits, int label)
{
    if (label < 0 || label >= logits.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    const Vector p = softmax(logits);
    return -std::log(std::max(p(label), kProbFloor));
}

Vector cross_entropy_grad(const VectorRef& logits, int label)
{
    if (label < 0 || label >= logits.size())
        throw std::invalid_argument("cross_entropy_grad: label out of range");
    Vector g = softmax(logits);
    g(label) -= 1.0;
    return g;
}

double surrogate_grad(double u, double alpha)
{
    const double w = kPi * u * alpha / 2.0;
    return (1.0 / kPi) / (1.0 + w * w);
}

double smooth_spike(double u, double alpha)
{
    return 0.5 + (2.0 / (kPi * kPi * alpha)) * std::atan(kPi * alpha * u / 2.0);
}

}  // namespace spikeforge
