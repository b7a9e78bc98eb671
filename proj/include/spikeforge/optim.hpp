#pragma once

#include <vector>

#include "spikeforge/types.hpp"

namespace spikeforge {

// Decoupled weight decay Adam (AdamW). Parameters are registered as named
// blocks; decay is applied only to blocks registered with decay = true
// (weight matrices), never to biases, thresholds, or batchnorm parameters.
struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
};

class AdamW {
  public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    // Registers a parameter block. The pointer must stay valid for the
    // lifetime of the optimizer. Vector blocks are treated as n x 1 matrices.
    // Returns the block index.
    std::size_t add_param(Matrix* param, bool decay);
    std::size_t add_param(Vector* param, bool decay);

    // Applies one update step. Gradients must match the registered blocks in
    // order and shape (vector blocks expect n x 1 gradients).
    void step(const std::vector<Matrix>& grads);

    // Allocates a zeroed gradient set matching the registered blocks.
    std::vector<Matrix> make_grads() const;

    std::size_t size() const { return params_.size(); }
    long step_count() const { return t_; }
    const AdamWConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

  private:
    struct Slot {
        Matrix* mat = nullptr;
        Vector* vec = nullptr;
        bool decay = false;
        Matrix m;
        Matrix v;

        Eigen::Index rows() const { return mat ? mat->rows() : vec->size(); }
        Eigen::Index cols() const { return mat ? mat->cols() : 1; }
    };

    void push_slot(Slot s);

    AdamWConfig cfg_;
    std::vector<Slot> params_;
    long t_ = 0;
};

}  // namespace spikeforge
