#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace stance {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

// One vertex of the computation graph. Op outputs hold shared ownership of
// their inputs so a graph lives exactly as long as its loss tensor.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized lazily, same length as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `self.grad` and accumulates into the parents' grad buffers.
  std::function<void(Node& self)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<double>& ensure_grad();
};

}  // namespace detail

// Dense row-major tensor of doubles with optional participation in the
// reverse-mode graph. Copies are shallow handles onto the same node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  // Negative axes count from the end.
  std::size_t dim(std::ptrdiff_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  // Mutable access is intended for leaves (parameters, inputs).
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t flat) const { return data()[flat]; }

  bool requires_grad() const;
  bool is_leaf() const;
  // Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  // Value copy with no graph membership.
  Tensor detach() const;

  const void* id() const noexcept { return node_.get(); }

  // Graph construction hook used by the op library.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward,
                            const char* op_name);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

// Gradients produced by a single backward call, keyed by leaf tensor.
class Gradients {
 public:
  bool contains(const Tensor& t) const { return grads_.contains(t.id()); }
  std::span<const double> of(const Tensor& t) const;
  std::size_t size() const { return grads_.size(); }
  bool empty() const { return grads_.empty(); }

 private:
  friend Gradients backward(const Tensor& loss);
  std::unordered_map<const void*, std::vector<double>> grads_;
};

// Reverse pass from a scalar loss. Every requires_grad leaf reachable from
// `loss` gets this pass's gradient added to its grad buffer; the same values
// are returned in the map. Throws ShapeError for non-scalar loss and
// NumericError if a non-finite gradient appears.
Gradients backward(const Tensor& loss);

}  // namespace stance
