#include "derflow/channel.hpp"

#include <stdexcept>

namespace derflow {

BroadcastChannel::BroadcastChannel(std::vector<double> p_loss, int e_max, uint64_t seed)
    : p_loss_(std::move(p_loss)), e_max_(e_max), rng_(seed),
      consecutive_failures_(p_loss_.size(), 0) {
    if (e_max_ < 0) throw std::invalid_argument("staleness cap must be nonnegative");
    for (double p : p_loss_)
        if (p < 0.0 || p >= 1.0 + 1e-15)
            throw std::invalid_argument("loss probability must lie in [0, 1]");
}

std::vector<uint8_t> BroadcastChannel::attempt_broadcast() {
    std::vector<uint8_t> delivered(p_loss_.size(), 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (size_t i = 0; i < p_loss_.size(); ++i) {
        const bool lost = unif(rng_) < p_loss_[i];
        if (lost && consecutive_failures_[i] < e_max_) {
            delivered[i] = 0;
            ++consecutive_failures_[i];
            worst_streak_ = std::max(worst_streak_, consecutive_failures_[i]);
        } else {
            delivered[i] = 1;  // success, or forced by the cap
            consecutive_failures_[i] = 0;
        }
    }
    return delivered;
}

}  // namespace derflow
