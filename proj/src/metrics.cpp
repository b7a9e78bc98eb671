#include "spikeforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spikeforge {

ConfusionCounts confusion(const std::vector<int>& pred, const std::vector<int>& truth)
{
    if (pred.size() != truth.size())
        throw shape_error("confusion: prediction and truth lengths differ");
    if (pred.empty()) throw std::invalid_argument("confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if ((pred[i] != 0 && pred[i] != 1) || (truth[i] != 0 && truth[i] != 1))
            throw std::invalid_argument("confusion: labels must be 0 or 1");
        if (truth[i] == 1)
            (pred[i] == 1 ? c.tp : c.fn)++;
        else
            (pred[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

double accuracy(const ConfusionCounts& c)
{
    if (c.total() == 0) throw std::invalid_argument("accuracy: empty counts");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1_score(const ConfusionCounts& c, int positive_class)
{
    const auto tp = static_cast<double>(positive_class == 1 ? c.tp : c.tn);
    const auto fp = static_cast<double>(positive_class == 1 ? c.fp : c.fn);
    const auto fn = static_cast<double>(positive_class == 1 ? c.fn : c.fp);
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 0.0;
    return 2.0 * tp / denom;
}

double macro_f1(const ConfusionCounts& c)
{
    return 0.5 * (f1_score(c, 0) + f1_score(c, 1));
}

double mcc(const ConfusionCounts& c)
{
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    const double denom =
        (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

double auc_mann_whitney(const std::vector<double>& scores,
                        const std::vector<int>& truth)
{
    if (scores.size() != truth.size())
        throw shape_error("auc: score and truth lengths differ");
    if (scores.empty()) throw std::invalid_argument("auc: empty input");

    std::size_t n_pos = 0;
    for (int y : truth) {
        if (y != 0 && y != 1) throw std::invalid_argument("auc: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = truth.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        log_warning("auc: only one class present, reporting 0.5");
        return 0.5;
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks across tie groups, then the rank-sum statistic.
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (truth[k] == 1) rank_sum_pos += rank[k];

    const auto np = static_cast<double>(n_pos);
    const auto nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricSet compute_metrics(const std::vector<int>& pred, const std::vector<int>& truth,
                          const std::vector<double>* scores)
{
    const ConfusionCounts c = confusion(pred, truth);
    MetricSet m;
    m.accuracy = accuracy(c);
    m.macro_f1 = macro_f1(c);
    m.mcc = mcc(c);
    if (scores) {
        m.auc = auc_mann_whitney(*scores, truth);
    } else {
        std::vector<double> from_pred(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i)
            from_pred[i] = static_cast<double>(pred[i]);
        m.auc = auc_mann_whitney(from_pred, truth);
    }
    return m;
}

double spike_density(const MatrixRef& spikes)
{
    if (spikes.size() == 0) throw std::invalid_argument("spike_density: empty train");
    return spikes.sum() / static_cast<double>(spikes.size());
}

double ensemble_density(double d_semg, double d_angle, double d_energy)
{
    if (d_semg <= 0.0 || d_angle <= 0.0 || d_energy <= 0.0) return 0.0;
    return 3.0 / (1.0 / d_semg + 1.0 / d_angle + 1.0 / d_energy);
}

}  // namespace spikeforge
