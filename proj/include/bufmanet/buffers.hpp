#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace bufmanet {

struct Packet {
  std::uint64_t id = 0;
  std::int32_t src = 0;
  std::int32_t dst = 0;
  std::int64_t gen_slot = 0;
};

/// Fixed-capacity FIFO used for a node's source buffer.
class SourceQueue {
 public:
  explicit SourceQueue(int capacity);

  int size() const { return size_; }
  int capacity() const { return static_cast<int>(ring_.size()); }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == capacity(); }

  /// Returns false (and stores nothing) when full.
  bool push(const Packet& packet);
  std::optional<Packet> pop();
  const Packet& front() const { return ring_[head_]; }

 private:
  std::vector<Packet> ring_;
  int head_ = 0;
  int size_ = 0;
};

/// Shared relay buffer of Br slots split into per-destination FIFO queues.
/// Slots are recycled through a free list, so no allocation happens after
/// construction.
class RelayBuffer {
 public:
  RelayBuffer(int capacity, int destinations);

  int size() const { return size_; }
  int capacity() const { return static_cast<int>(slots_.size()); }
  bool full() const { return size_ == capacity(); }
  int nonempty_queues() const { return nonempty_; }
  int queue_length(int dst) const { return length_[static_cast<std::size_t>(dst)]; }

  /// Appends to the queue for packet.dst. Returns false when full.
  bool push(const Packet& packet);
  /// Removes the head-of-line packet for dst, if any.
  std::optional<Packet> pop(int dst);

 private:
  static constexpr int kNone = -1;

  std::vector<Packet> slots_;
  std::vector<int> next_;
  std::vector<int> head_;
  std::vector<int> tail_;
  std::vector<int> length_;
  int free_ = kNone;
  int size_ = 0;
  int nonempty_ = 0;
};

}  // namespace bufmanet
