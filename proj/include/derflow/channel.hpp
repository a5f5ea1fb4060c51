#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace derflow {

/// Lossy aggregator-to-DER broadcast. Losses are i.i.d. Bernoulli per DER,
/// with delivery forced after e_max consecutive failures so the staleness cap
/// holds by construction. The uplink (measurements to the aggregator) is
/// lossless.
class BroadcastChannel {
  public:
    BroadcastChannel(std::vector<double> p_loss, int e_max, uint64_t seed);

    /// Advances the channel one global tick; returns the delivery bitmap.
    std::vector<uint8_t> attempt_broadcast();

    int e_max() const { return e_max_; }
    int max_consecutive_failures() const { return worst_streak_; }

  private:
    std::vector<double> p_loss_;
    int e_max_;
    std::mt19937_64 rng_;
    std::vector<int> consecutive_failures_;
    int worst_streak_ = 0;
};

}  // namespace derflow
