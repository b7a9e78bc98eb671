#include "spikeforge/mi.hpp"

#include <cmath>

namespace spikeforge {

namespace {

Vector bin_centers(int n_bins)
{
    Vector mu(n_bins);
    for (int b = 0; b < n_bins; ++b) mu(b) = (b + 0.5) / n_bins;
    return mu;
}

// Unnormalized kernel weights and, optionally, the derivative of the
// normalized weights with respect to the value.
void kernel_weights(const VectorRef& values, const MiEstimatorConfig& cfg,
                    Matrix& normalized, Matrix* d_normalized)
{
    const int n_bins = cfg.n_bins;
    const Vector mu = bin_centers(n_bins);
    const double inv_two_s2 = 1.0 / (2.0 * cfg.bandwidth() * cfg.bandwidth());
    const double inv_s2 = 1.0 / (cfg.bandwidth() * cfg.bandwidth());

    const Eigen::Index n = values.size();
    normalized.resize(n, n_bins);
    if (d_normalized) d_normalized->resize(n, n_bins);

    for (Eigen::Index t = 0; t < n; ++t) {
        const double raw = values(t);
        const double v = std::clamp(raw, 0.0, 1.0);
        const bool clamped = raw < 0.0 || raw > 1.0;
        double total = 0.0, total_d = 0.0;
        Eigen::RowVectorXd g(n_bins), gd(n_bins);
        for (int b = 0; b < n_bins; ++b) {
            const double diff = v - mu(b);
            g(b) = std::exp(-diff * diff * inv_two_s2);
            gd(b) = g(b) * (-diff) * inv_s2;  // dg/dv
            total += g(b);
            total_d += gd(b);
        }
        normalized.row(t) = g / total;
        if (d_normalized) {
            if (clamped) {
                d_normalized->row(t).setZero();
            } else {
                // d(g_b/G)/dv = (g_b' G - g_b G') / G^2
                d_normalized->row(t) = (gd * total - g * total_d) / (total * total);
            }
        }
    }
}

}  // namespace

Matrix soft_bin_weights(const VectorRef& values, const MiEstimatorConfig& cfg)
{
    cfg.validate();
    Matrix w;
    kernel_weights(values, cfg, w, nullptr);
    return w;
}

double mutual_information(const VectorRef& x, const VectorRef& y,
                          const MiEstimatorConfig& cfg)
{
    Vector unused;
    return mutual_information_with_grad(x, y, cfg, unused);
}

double mutual_information_with_grad(const VectorRef& x, const VectorRef& y,
                                    const MiEstimatorConfig& cfg, Vector& grad_y)
{
    cfg.validate();
    if (x.size() != y.size())
        throw shape_error("mutual_information: length mismatch " +
                          std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    if (x.size() == 0) throw std::invalid_argument("mutual_information: empty input");

    Matrix wx, wy, dwy;
    kernel_weights(x, cfg, wx, nullptr);
    kernel_weights(y, cfg, wy, &dwy);

    const double inv_n = 1.0 / static_cast<double>(x.size());
    const Matrix joint = (wx.transpose() * wy) * inv_n;
    const Vector px = joint.rowwise().sum();
    const Vector py = joint.colwise().sum();

    double mi = 0.0;
    Matrix log_ratio = Matrix::Zero(cfg.n_bins, cfg.n_bins);
    for (int i = 0; i < cfg.n_bins; ++i) {
        for (int j = 0; j < cfg.n_bins; ++j) {
            const double p = joint(i, j);
            if (p <= 0.0) continue;  // lim p->0 of p*log(...) is 0
            log_ratio(i, j) = std::log(p) - std::log(px(i)) - std::log(py(j));
            mi += p * log_ratio(i, j);
        }
    }

    // dMI/dy_t = (1/n) * a_t^T * log_ratio * b'_t; the constant part of
    // d/dP integrates to zero because normalized weights sum to one.
    grad_y = ((wx * log_ratio).cwiseProduct(dwy)).rowwise().sum() * inv_n;

    return mi < 0.0 ? 0.0 : mi;
}

}  // namespace spikeforge
