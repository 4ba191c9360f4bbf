#include "tutor/replay.hpp"

#include "tutor/error.hpp"

namespace tutor {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw ConfigError("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(t));
    } else {
        ring_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::from_oldest(std::size_t i) const {
    if (i >= ring_.size()) throw BoundsError("ReplayBuffer: index out of range");
    return ring_[(head_ + i) % ring_.size()];
}

std::vector<Transition> ReplayBuffer::recent(std::size_t m) const {
    if (m > ring_.size()) throw PreconditionError("ReplayBuffer::recent: not enough data");
    std::vector<Transition> out;
    out.reserve(m);
    for (std::size_t i = ring_.size() - m; i < ring_.size(); ++i) {
        out.push_back(from_oldest(i));
    }
    return out;
}

std::optional<std::vector<Transition>> ReplayBuffer::try_sample(std::size_t m, Rng& rng) const {
    if (ring_.size() < m) return std::nullopt;
    auto picks = rng.sample_without_replacement(ring_.size(), m);
    std::vector<Transition> out;
    out.reserve(m);
    for (std::size_t i : picks) out.push_back(from_oldest(i));
    return out;
}

}  // namespace tutor
