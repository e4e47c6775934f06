#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "ifadit/tensor.hpp"

namespace ifadit {

// Reverse-mode autodiff over Tensors, sized for the graph shapes this
// project needs (dense layers, elementwise maps, reductions, windowed
// means). A forward pass builds an ephemeral expression graph; backward()
// walks it in reverse topological order and accumulates gradients into
// every node with requires_grad set. Frozen parameters (requires_grad
// false) receive no gradient.

struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;

    Tensor& ensure_grad() {
        if (grad.data.empty()) grad = Tensor::zeros(value.shape);
        return grad;
    }
};

class Var {
  public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool has_grad() const { return node_ && !node_->grad.data.empty(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    void zero_grad();

    const Shape& shape() const { return node_->value.shape; }
    std::size_t size() const { return node_->value.size(); }

    std::shared_ptr<Node> node() const { return node_; }
    static Var wrap(std::shared_ptr<Node> n);

  private:
    std::shared_ptr<Node> node_;
};

// Leaf with no gradient.
Var constant(Tensor value);
Var scalar_const(double v);

// Seeds d(loss)/d(loss) = 1 and accumulates gradients through the graph.
// The loss must hold exactly one entry.
void backward(const Var& loss);

// --- dense algebra -------------------------------------------------------

// [B,m] x [m,n] -> [B,n]
Var matmul(const Var& a, const Var& w);
// [B,n] + [n] broadcast over rows
Var add_row(const Var& a, const Var& bias);

// --- elementwise (same shape, or one side scalar) ------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_const(const Var& a, double c);

Var vexp(const Var& a);
Var vtanh(const Var& a);
Var sigmoid(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var vabs(const Var& a);
Var square(const Var& a);
Var vsqrt(const Var& a);       // requires positive inputs
Var safe_sqrt(const Var& a);   // sqrt(max(x,0)) with zero subgradient at 0
Var rsqrt(const Var& a);       // 1/sqrt(x), requires positive inputs
Var maximum(const Var& a, double c);

// --- reductions and broadcasts -------------------------------------------

Var sum(const Var& a);   // -> [1]
Var mean(const Var& a);  // -> [1]
Var row_sum(const Var& a);               // [B,n] -> [B]
Var row_scale(const Var& a, const Var& s);  // [B,n] * s[B]

// --- structure ------------------------------------------------------------

Var concat_cols(const Var& a, const Var& b);           // [B,p],[B,q] -> [B,p+q]
Var slice_cols(const Var& a, std::size_t lo, std::size_t hi);
Var select_rows(const Var& a, const std::vector<std::size_t>& rows);
Var reshape(const Var& a, Shape shape);

// Mean over every valid win x win window of each row interpreted as an
// H x W image: [B,H*W] -> [B,(H-win+1)*(W-win+1)].
Var box_mean(const Var& a, std::size_t h, std::size_t w, std::size_t win);

// --- composites -----------------------------------------------------------

// Per-row cosine similarity of two [B,n] tensors -> [B]. Exactly 1 for a
// row compared against itself.
Var cos_rows(const Var& a, const Var& b);

// Rows scaled to unit L2 norm. Rows must have nonzero norm.
Var normalize_rows(const Var& a);

// Mean absolute difference over all entries -> [1].
Var l1_mean(const Var& a, const Var& b);

}  // namespace ifadit
