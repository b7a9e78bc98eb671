#include "spikeforge/stal_loss.hpp"

#include <cmath>

namespace spikeforge {

Vector align_dims(const VectorRef& z, Eigen::Index target)
{
    const Eigen::Index len = z.size();
    if (len < 1) throw std::invalid_argument("align_dims: empty input");
    if (target < 1) throw std::invalid_argument("align_dims: target must be >= 1");
    if (len == target) return z;

    if (len < target) {
        Vector out(target);
        for (Eigen::Index i = 0; i < target; ++i) out(i) = z(i % len);
        return out;
    }

    const Eigen::Index pool = len / target;
    const Eigen::Index pooled_len = len / pool;
    Vector out(target);
    for (Eigen::Index i = 0; i < target; ++i) {
        if (i < pooled_len) {
            out(i) = z.segment(i * pool, pool).mean();
        } else {
            out(i) = out(pooled_len - 1);  // pad-last; unreachable for pool = floor(l/t)
        }
    }
    return out;
}

Vector align_dims_backward(const VectorRef& grad_aligned, Eigen::Index source_len)
{
    const Eigen::Index target = grad_aligned.size();
    if (source_len == target) return grad_aligned;

    Vector grad = Vector::Zero(source_len);
    if (source_len < target) {
        for (Eigen::Index i = 0; i < target; ++i) grad(i % source_len) += grad_aligned(i);
        return grad;
    }

    const Eigen::Index pool = source_len / target;
    const Eigen::Index pooled_len = source_len / pool;
    for (Eigen::Index i = 0; i < target; ++i) {
        const Eigen::Index src = std::min(i, pooled_len - 1);
        grad.segment(src * pool, pool).array() += grad_aligned(i) / pool;
    }
    return grad;
}

namespace {

StalLossResult loss_impl(const VectorRef& x_f, const VectorRef& z1,
                         const VectorRef& z2, const VectorRef& b_hat,
                         double p_sum, double lambda, const MiEstimatorConfig& cfg,
                         StalLossGrads* grads)
{
    if (z1.size() != x_f.size() || z2.size() != x_f.size() ||
        b_hat.size() != x_f.size())
        throw shape_error("stal_loss: operands must all have length omega*c");
    if (p_sum <= 0.0)
        throw std::invalid_argument("stal_loss: position weight sum must be positive");
    if (lambda < 0.0) throw std::invalid_argument("stal_loss: lambda must be >= 0");

    const Vector b_scaled = b_hat / p_sum;

    StalLossResult r;
    if (grads) {
        Vector g1, g2, gb;
        const double mi1 = mutual_information_with_grad(x_f, z1, cfg, g1);
        const double mi2 = mutual_information_with_grad(x_f, z2, cfg, g2);
        const double mib = mutual_information_with_grad(x_f, b_scaled, cfg, gb);
        r.l_mi = -(mi1 + mi2 + mib) / 3.0;
        grads->z1 = -g1 / 3.0;
        grads->z2 = -g2 / 3.0;
        grads->b_hat = -gb / (3.0 * p_sum);
    } else {
        r.l_mi = -(mutual_information(x_f, z1, cfg) + mutual_information(x_f, z2, cfg) +
                   mutual_information(x_f, b_scaled, cfg)) /
                 3.0;
    }

    const Vector diff = x_f - b_scaled;
    r.l_s = lambda * diff.cwiseAbs().sum();
    if (grads) {
        for (Eigen::Index i = 0; i < diff.size(); ++i) {
            const double sign = diff(i) > 0.0 ? 1.0 : (diff(i) < 0.0 ? -1.0 : 0.0);
            grads->b_hat(i) += -lambda * sign / p_sum;
        }
    }

    r.total = r.l_mi + r.l_s;
    return r;
}

}  // namespace

StalLossResult stal_loss(const VectorRef& x_f, const VectorRef& z1_aligned,
                         const VectorRef& z2_aligned, const VectorRef& b_hat,
                         double position_weight_sum, double lambda,
                         const MiEstimatorConfig& cfg)
{
    return loss_impl(x_f, z1_aligned, z2_aligned, b_hat, position_weight_sum, lambda,
                     cfg, nullptr);
}

StalLossResult stal_loss_with_grad(const VectorRef& x_f, const VectorRef& z1_aligned,
                                   const VectorRef& z2_aligned, const VectorRef& b_hat,
                                   double position_weight_sum, double lambda,
                                   const MiEstimatorConfig& cfg, StalLossGrads& grads)
{
    return loss_impl(x_f, z1_aligned, z2_aligned, b_hat, position_weight_sum, lambda,
                     cfg, &grads);
}

}  // namespace spikeforge
