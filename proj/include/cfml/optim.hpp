#pragma once

#include <vector>

#include "cfml/numerics.hpp"

namespace cfml {

/// SGD with momentum and L2 weight decay on flat parameter vectors.
/// Update: g <- g + wd * mask * w; v <- momentum * v + g; w <- w - lr * v.
/// With momentum = 0 and wd = 0 this reduces to plain gradient descent.
class SgdMomentum {
public:
    SgdMomentum(std::size_t param_count, double momentum, double weight_decay,
                Vector decay_mask)
        : momentum_(momentum),
          weight_decay_(weight_decay),
          mask_(std::move(decay_mask)),
          velocity_(param_count, 0.0) {
        if (mask_.size() != param_count)
            throw Error(ErrorCode::DimensionMismatch, "decay mask length");
    }

    void step(Vector& params, const Vector& grad, double lr) {
        if (params.size() != velocity_.size() || grad.size() != velocity_.size())
            throw Error(ErrorCode::DimensionMismatch, "optimizer step lengths");
        for (std::size_t i = 0; i < params.size(); ++i) {
            double g = grad[i] + weight_decay_ * mask_[i] * params[i];
            velocity_[i] = momentum_ * velocity_[i] + g;
            params[i] -= lr * velocity_[i];
        }
    }

    void reset() { std::fill(velocity_.begin(), velocity_.end(), 0.0); }

private:
    double momentum_;
    double weight_decay_;
    Vector mask_;
    Vector velocity_;
};

} // namespace cfml
