#include "spikeforge/synth.hpp"

#include <cmath>
#include <cstdio>

#include "spikeforge/rng.hpp"

namespace spikeforge {

namespace {

constexpr double kSampleRateHz = 60.0;
constexpr double kTwoPi = 2.0 * M_PI;

// Positive-class structural shifts. Calibrated so a linear probe on windowed
// channel means separates classes well while per-window noise keeps the task
// non-trivial for stochastic encoders.
struct ClassProfile {
    double semg_burst_hz;
    double semg_duty_exponent;
    double semg_channel_tilt;   // gain slope across the 4 sEMG channels
    double angle_motion_hz;
    double angle_rom_reduction; // range-of-motion loss at the most affected joint
    double energy_level;
    double energy_channel_tilt;
};

ClassProfile profile_for(int label)
{
    if (label == 1)
        return {1.30, 3.0, 0.35, 0.25, 0.55, 0.55, -0.35};
    return {0.85, 1.2, 0.00, 0.40, 0.00, 1.00, 0.00};
}

Matrix make_semg(Eigen::Index length, const ClassProfile& p, Rng& rng)
{
    const int channels = 4;
    Matrix data(length, channels);
    const double f = p.semg_burst_hz * (1.0 + 0.10 * (rng.uniform() - 0.5));
    const double phase = rng.uniform(0.0, kTwoPi);
    Eigen::VectorXd baseline(channels), gain(channels), chphase(channels);
    for (int k = 0; k < channels; ++k) {
        baseline(k) = 0.12 + 0.05 * rng.uniform();
        gain(k) = (0.75 + 0.15 * rng.uniform()) *
                  (1.0 + p.semg_channel_tilt * k / (channels - 1.0));
        chphase(k) = 0.15 * rng.uniform();
    }
    for (Eigen::Index t = 0; t < length; ++t) {
        const double base = kTwoPi * f * t / kSampleRateHz + phase;
        for (int k = 0; k < channels; ++k) {
            const double s = std::sin(base + chphase(k));
            const double envelope = s > 0.0 ? std::pow(s, p.semg_duty_exponent) : 0.0;
            const double tremor = 1.0 + 0.25 * std::sin(kTwoPi * 9.0 * t / kSampleRateHz +
                                                        7.0 * chphase(k));
            data(t, k) = baseline(k) + gain(k) * envelope * tremor + 0.06 * rng.normal();
        }
    }
    return data;
}

Matrix make_angle(Eigen::Index length, const ClassProfile& p, Rng& rng)
{
    const int channels = 13;
    Matrix data(length, channels);
    const double f = p.angle_motion_hz * (1.0 + 0.10 * (rng.uniform() - 0.5));
    Eigen::VectorXd mid(channels), rom(channels), phase(channels);
    for (int j = 0; j < channels; ++j) {
        mid(j) = 0.2 + 0.6 * j / (channels - 1.0) + 0.03 * rng.normal();
        // Joints are affected unevenly so the reduction survives joint
        // min-max normalization.
        const double affected = static_cast<double>(j) / (channels - 1.0);
        rom(j) = (0.10 + 0.04 * rng.uniform()) *
                 (1.0 - p.angle_rom_reduction * affected);
        phase(j) = rng.uniform(0.0, kTwoPi);
    }
    for (Eigen::Index t = 0; t < length; ++t) {
        const double base = kTwoPi * f * t / kSampleRateHz;
        for (int j = 0; j < channels; ++j)
            data(t, j) = mid(j) + rom(j) * std::sin(base + phase(j)) +
                         0.02 * rng.normal();
    }
    return data;
}

Matrix make_energy(Eigen::Index length, const ClassProfile& p, Rng& rng)
{
    const int channels = 13;
    Matrix data(length, channels);
    const double f = p.angle_motion_hz * (1.0 + 0.10 * (rng.uniform() - 0.5));
    Eigen::VectorXd level(channels), phase(channels);
    for (int j = 0; j < channels; ++j) {
        const double tilt = 1.0 + p.energy_channel_tilt * j / (channels - 1.0);
        level(j) = p.energy_level * (0.5 + 0.3 * rng.uniform()) * tilt;
        phase(j) = rng.uniform(0.0, kTwoPi);
    }
    for (Eigen::Index t = 0; t < length; ++t) {
        const double base = kTwoPi * f * t / kSampleRateHz;
        for (int j = 0; j < channels; ++j) {
            const double osc = 0.5 + 0.5 * std::sin(base + phase(j));
            data(t, j) = level(j) * osc * osc + 0.05 + 0.03 * rng.normal();
        }
    }
    return data;
}

}  // namespace

Dataset synthesize_dataset(int n_subjects, int n_positive, Eigen::Index length,
                           std::uint64_t seed)
{
    if (n_subjects < 1) throw std::invalid_argument("n_subjects must be positive");
    if (n_positive < 0 || n_positive > n_subjects)
        throw std::invalid_argument("n_positive must be in [0, n_subjects]");
    if (length < 1) throw std::invalid_argument("length must be >= 1");

    Dataset ds;
    for (int s = 0; s < n_subjects; ++s) {
        const int label = s < n_positive ? 1 : 0;
        const ClassProfile p = profile_for(label);
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(s)));

        char id[16];
        std::snprintf(id, sizeof(id), "S%03d", s);

        const int pain = label == 1 ? 6 + static_cast<int>(rng.uniform_int(5))
                                    : static_cast<int>(rng.uniform_int(6));

        auto add = [&](Modality m, Matrix values) {
            Recording rec;
            rec.subject_id = id;
            rec.modality = m;
            rec.sample_rate_hz = kSampleRateHz;
            rec.pain_intensity = pain;
            rec.data = std::move(values);
            ds.add(std::move(rec));
        };
        add(Modality::kSemg, make_semg(length, p, rng));
        add(Modality::kAngle, make_angle(length, p, rng));
        add(Modality::kEnergy, make_energy(length, p, rng));
    }
    return ds;
}

}  // namespace spikeforge
