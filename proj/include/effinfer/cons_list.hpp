#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace effinfer {

/// Immutable singly linked list with structural sharing. Copies are O(1), so
/// it can be captured by value in resumptions that may run more than once.
template <class T>
class ConsList {
 public:
  ConsList() = default;

  ConsList push(T value) const {
    return ConsList(std::make_shared<Cell>(Cell{std::move(value), head_}), size_ + 1);
  }

  bool empty() const { return head_ == nullptr; }
  std::size_t size() const { return size_; }
  const T& front() const { return head_->value; }
  ConsList tail() const {
    ConsList rest;
    rest.head_ = head_->next;
    rest.size_ = size_ - 1;
    return rest;
  }

  /// Elements in order, most recently pushed first.
  std::vector<T> newest_first() const {
    std::vector<T> out;
    out.reserve(size_);
    for (const Cell* c = head_.get(); c != nullptr; c = c->next.get()) out.push_back(c->value);
    return out;
  }

  /// Elements in push order.
  std::vector<T> oldest_first() const {
    std::vector<T> out = newest_first();
    return {std::make_move_iterator(out.rbegin()), std::make_move_iterator(out.rend())};
  }

  ~ConsList() {
    // Unlink uniquely owned cells iteratively; long chains would otherwise
    // recurse once per cell.
    std::shared_ptr<Cell> cur = std::move(head_);
    while (cur && cur.use_count() == 1) cur = std::move(cur->next);
  }

  ConsList(const ConsList&) = default;
  ConsList(ConsList&&) noexcept = default;
  ConsList& operator=(const ConsList&) = default;
  ConsList& operator=(ConsList&&) noexcept = default;

 private:
  struct Cell {
    T value;
    std::shared_ptr<Cell> next;
  };

  ConsList(std::shared_ptr<Cell> head, std::size_t size) : head_(std::move(head)), size_(size) {}

  std::shared_ptr<Cell> head_;
  std::size_t size_ = 0;
};

}  // namespace effinfer
