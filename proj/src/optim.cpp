#include "spikeforge/optim.hpp"

#include <cmath>

namespace spikeforge {

void AdamW::push_slot(Slot s)
{
    s.m = Matrix::Zero(s.rows(), s.cols());
    s.v = Matrix::Zero(s.rows(), s.cols());
    params_.push_back(std::move(s));
}

std::size_t AdamW::add_param(Matrix* param, bool decay)
{
    if (param == nullptr) throw std::invalid_argument("AdamW: null parameter");
    Slot s;
    s.mat = param;
    s.decay = decay;
    push_slot(std::move(s));
    return params_.size() - 1;
}

std::size_t AdamW::add_param(Vector* param, bool decay)
{
    if (param == nullptr) throw std::invalid_argument("AdamW: null parameter");
    Slot s;
    s.vec = param;
    s.decay = decay;
    push_slot(std::move(s));
    return params_.size() - 1;
}

std::vector<Matrix> AdamW::make_grads() const
{
    std::vector<Matrix> grads;
    grads.reserve(params_.size());
    for (const Slot& s : params_) grads.push_back(Matrix::Zero(s.rows(), s.cols()));
    return grads;
}

void AdamW::step(const std::vector<Matrix>& grads)
{
    if (grads.size() != params_.size())
        throw shape_error("AdamW::step: gradient count does not match parameter count");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Slot& s = params_[i];
        const Matrix& g = grads[i];
        if (g.rows() != s.rows() || g.cols() != s.cols())
            throw shape_error("AdamW::step: gradient shape mismatch");
        s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * g;
        s.v = cfg_.beta2 * s.v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        Matrix update =
            (s.m / bc1).array() / ((s.v / bc2).array().sqrt() + cfg_.eps);
        if (s.decay) {
            if (s.mat)
                update.array() += cfg_.weight_decay * s.mat->array();
            else
                update.col(0) += cfg_.weight_decay * *s.vec;
        }
        if (s.mat)
            *s.mat -= cfg_.lr * update;
        else
            *s.vec -= cfg_.lr * update.col(0);
    }
}

}  // namespace spikeforge
