#include "bufmanet/buffers.hpp"

#include <stdexcept>

namespace bufmanet {

SourceQueue::SourceQueue(int capacity) : ring_(static_cast<std::size_t>(capacity)) {
  if (capacity < 1) throw std::invalid_argument("source queue capacity must be positive");
}

bool SourceQueue::push(const Packet& packet) {
  if (full()) return false;
  const int tail = (head_ + size_) % capacity();
  ring_[static_cast<std::size_t>(tail)] = packet;
  ++size_;
  return true;
}

std::optional<Packet> SourceQueue::pop() {
  if (empty()) return std::nullopt;
  Packet out = ring_[static_cast<std::size_t>(head_)];
  head_ = (head_ + 1) % capacity();
  --size_;
  return out;
}

RelayBuffer::RelayBuffer(int capacity, int destinations)
    : slots_(static_cast<std::size_t>(capacity)),
      next_(static_cast<std::size_t>(capacity), kNone),
      head_(static_cast<std::size_t>(destinations), kNone),
      tail_(static_cast<std::size_t>(destinations), kNone),
      length_(static_cast<std::size_t>(destinations), 0) {
  if (capacity < 0) throw std::invalid_argument("relay capacity must be non-negative");
  for (int i = capacity - 1; i >= 0; --i) {
    next_[static_cast<std::size_t>(i)] = free_;
    free_ = i;
  }
}

bool RelayBuffer::push(const Packet& packet) {
  if (full()) return false;
  const auto dst = static_cast<std::size_t>(packet.dst);
  const int slot = free_;
  free_ = next_[static_cast<std::size_t>(slot)];

  slots_[static_cast<std::size_t>(slot)] = packet;
  next_[static_cast<std::size_t>(slot)] = kNone;
  if (tail_[dst] == kNone) {
    head_[dst] = slot;
    ++nonempty_;
  } else {
    next_[static_cast<std::size_t>(tail_[dst])] = slot;
  }
  tail_[dst] = slot;
  ++length_[dst];
  ++size_;
  return true;
}

std::optional<Packet> RelayBuffer::pop(int dst_id) {
  const auto dst = static_cast<std::size_t>(dst_id);
  const int slot = head_[dst];
  if (slot == kNone) return std::nullopt;

  Packet out = slots_[static_cast<std::size_t>(slot)];
  head_[dst] = next_[static_cast<std::size_t>(slot)];
  if (head_[dst] == kNone) {
    tail_[dst] = kNone;
    --nonempty_;
  }
  next_[static_cast<std::size_t>(slot)] = free_;
  free_ = slot;
  --length_[dst];
  --size_;
  return out;
}

}  // namespace bufmanet
