#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tutor/rng.hpp"

namespace tutor {

// One teacher experience. A DDPG teacher stores the raw two-component action;
// a DQN teacher stores the batch id as a single-element action vector.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
};

// Bounded FIFO ring: once full, pushing evicts the oldest transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return ring_.size(); }

    void push(Transition t);

    // i = 0 is the oldest surviving transition.
    const Transition& from_oldest(std::size_t i) const;

    // The m most recent transitions in insertion order (m <= size).
    std::vector<Transition> recent(std::size_t m) const;

    // Uniform sample of m distinct transitions; empty optional when size < m.
    std::optional<std::vector<Transition>> try_sample(std::size_t m, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // slot the next push writes once full
    std::vector<Transition> ring_;
};

}  // namespace tutor
