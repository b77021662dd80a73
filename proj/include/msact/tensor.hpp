#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace msact::nn {

using Shape = std::vector<int>;

inline size_t numel(const Shape& s) {
  size_t n = 1;
  for (int d : s) n *= static_cast<size_t>(d);
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::shared_ptr<std::vector<T>> data;  // shared so leaves can alias parameters
  std::vector<T> grad;                   // sized lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // accumulates into parents' grad
  const char* op = "leaf";

  size_t size() const { return numel(shape); }
  void ensure_grad() {
    if (grad.size() != size()) grad.assign(size(), T(0));
  }
};

}  // namespace detail

// Value-semantics handle over a graph node. Copies share the node.
template <typename T>
class Tensor {
 public:
  using Node = detail::Node<T>;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return filled(std::move(shape), T(0), requires_grad);
  }

  static Tensor filled(Shape shape, T value, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->data = std::make_shared<std::vector<T>>(numel(shape), value);
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor from_data(Shape shape, std::vector<T> data,
                          bool requires_grad = false) {
    check(numel(shape) == data.size(),
          "tensor: data length " + std::to_string(data.size()) +
              " does not match shape " + shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::make_shared<std::vector<T>>(std::move(data));
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  // Leaf aliasing external storage (used to bind model parameters into a
  // graph without copying; the graph owns its own grad buffer).
  static Tensor leaf_view(Shape shape, std::shared_ptr<std::vector<T>> data,
                          bool requires_grad) {
    check(data && numel(shape) == data->size(),
          "tensor: view storage does not match shape " + shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor scalar(T value, bool requires_grad = false) {
    return from_data({1}, {value}, requires_grad);
  }

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  size_t size() const { return n_->size(); }
  bool requires_grad() const { return n_->requires_grad; }

  const std::vector<T>& data() const { return *n_->data; }
  std::vector<T>& mutable_data() { return *n_->data; }
  const std::vector<T>& grad() const { return n_->grad; }

  T item() const {
    check(size() == 1, "tensor: item() on non-scalar " + shape_str(shape()));
    return (*n_->data)[0];
  }

  T at(size_t i) const { return (*n_->data)[i]; }

  // Same values, no graph history.
  Tensor detach() const {
    auto n = std::make_shared<Node>();
    n->shape = n_->shape;
    n->data = n_->data;
    n->requires_grad = false;
    return Tensor(std::move(n));
  }

  std::shared_ptr<Node> node() const { return n_; }

 private:
  std::shared_ptr<Node> n_;
};

// Reverse-mode sweep from a scalar root. Each node's backward closure runs
// exactly once, after all its consumers.
template <typename T>
inline void backward(const Tensor<T>& root) {
  check(root.size() == 1, "backward: root must be scalar, got " +
                              shape_str(root.shape()));
  if (!root.requires_grad()) return;

  using Node = detail::Node<T>;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // iterative post-order DFS
  std::vector<std::pair<Node*, size_t>> stack;
  stack.push_back({root.node().get(), 0});
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) n->ensure_grad();
  root.node()->grad[0] = T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace msact::nn
