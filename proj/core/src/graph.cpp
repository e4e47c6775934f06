#include "ifadit/graph.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "ifadit/error.hpp"

namespace ifadit {

namespace {

Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backprop,
            const char* name) {
    quantize_inplace(value);
    require_finite(value, name);
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    for (const auto& in : inputs) {
        if (in.requires_grad()) {
            node->requires_grad = true;
            break;
        }
    }
    if (node->requires_grad) {
        node->parents.reserve(inputs.size());
        for (auto& in : inputs) node->parents.push_back(in.node());
        node->backprop = std::move(backprop);
    }
    return Var::wrap(std::move(node));
}

void check_matching(const Var& a, const Var& b, const char* op) {
    require_same_shape(a.value(), b.value(), op);
}

// Elementwise binary op where either side may be a scalar tensor.
template <typename Fwd, typename BwdA, typename BwdB>
Var binary_op(const Var& a, const Var& b, const char* name, Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const bool sa = av.size() == 1;
    const bool sb = bv.size() == 1;
    if (!sa && !sb) require_same_shape(av, bv, name);
    const std::size_t n = sa ? bv.size() : av.size();
    Tensor out(sa ? bv.shape : av.shape);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = fwd(av[sa ? 0 : i], bv[sb ? 0 : i]);
    return make_op(
        std::move(out), {a, b},
        [sa, sb, n, bwd_a, bwd_b](Node& self) {
            const Tensor& g = self.grad;
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            if (pa.requires_grad) {
                Tensor& ga = pa.ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    ga[sa ? 0 : i] += bwd_a(g[i], pa.value[sa ? 0 : i], pb.value[sb ? 0 : i]);
            }
            if (pb.requires_grad) {
                Tensor& gb = pb.ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    gb[sb ? 0 : i] += bwd_b(g[i], pa.value[sa ? 0 : i], pb.value[sb ? 0 : i]);
            }
        },
        name);
}

template <typename Fwd, typename Bwd>
Var unary_op(const Var& a, const char* name, Fwd fwd, Bwd bwd) {
    const Tensor& av = a.value();
    Tensor out(av.shape);
    const std::size_t n = av.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i]);
    auto out_node = make_op(
        std::move(out), {a},
        [n, bwd](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                ga[i] += bwd(self.grad[i], pa.value[i], self.value[i]);
        },
        name);
    return out_node;
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
    quantize_inplace(value);
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

void Var::zero_grad() {
    if (node_) node_->grad = Tensor();
}

Var Var::wrap(std::shared_ptr<Node> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
}

Var constant(Tensor value) { return Var(std::move(value), false); }
Var scalar_const(double v) { return constant(Tensor::scalar_tensor(v)); }

void backward(const Var& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ContractError("backward: loss must be a scalar");
    if (!std::isfinite(loss.value()[0]))
        throw NumericError("backward: loss is not finite");
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS; children visited in parent-list order keeps
    // accumulation order deterministic.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    visited.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second)
                stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->ensure_grad()[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backprop && !node->grad.data.empty()) node->backprop(*node);
    }
}

Var matmul(const Var& a, const Var& w) {
    const Tensor& av = a.value();
    const Tensor& wv = w.value();
    if (av.shape.size() != 2 || wv.shape.size() != 2 || av.shape[1] != wv.shape[0])
        throw DimensionError("matmul: incompatible shapes " + shape_str(av.shape) + " x " +
                             shape_str(wv.shape));
    const std::size_t rows = av.shape[0], inner = av.shape[1], cols = wv.shape[1];
    Tensor out({rows, cols});
    for (std::size_t i = 0; i < rows; ++i) {
        double* c = out.data.data() + i * cols;
        const double* arow = av.data.data() + i * inner;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = arow[k];
            const double* wrow = wv.data.data() + k * cols;
            for (std::size_t j = 0; j < cols; ++j) c[j] += aik * wrow[j];
        }
    }
    return make_op(
        std::move(out), {a, w},
        [rows, inner, cols](Node& self) {
            const double* g = self.grad.data.data();
            auto& pa = *self.parents[0];
            auto& pw = *self.parents[1];
            if (pa.requires_grad) {
                double* ga = pa.ensure_grad().data.data();
                const double* wd = pw.value.data.data();
                for (std::size_t i = 0; i < rows; ++i) {
                    const double* grow = g + i * cols;
                    double* garow = ga + i * inner;
                    for (std::size_t k = 0; k < inner; ++k) {
                        const double* wrow = wd + k * cols;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < cols; ++j) acc += grow[j] * wrow[j];
                        garow[k] += acc;
                    }
                }
            }
            if (pw.requires_grad) {
                double* gw = pw.ensure_grad().data.data();
                const double* ad = pa.value.data.data();
                for (std::size_t i = 0; i < rows; ++i) {
                    const double* grow = g + i * cols;
                    const double* arow = ad + i * inner;
                    for (std::size_t k = 0; k < inner; ++k) {
                        const double aik = arow[k];
                        double* gwrow = gw + k * cols;
                        for (std::size_t j = 0; j < cols; ++j) gwrow[j] += aik * grow[j];
                    }
                }
            }
        },
        "matmul");
}

Var add_row(const Var& a, const Var& bias) {
    const Tensor& av = a.value();
    const Tensor& bv = bias.value();
    if (av.shape.size() != 2 || bv.shape.size() != 1 || av.shape[1] != bv.shape[0])
        throw DimensionError("add_row: incompatible shapes " + shape_str(av.shape) + " + " +
                             shape_str(bv.shape));
    const std::size_t rows = av.shape[0], cols = av.shape[1];
    Tensor out(av.shape);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = av[i * cols + j] + bv[j];
    return make_op(
        std::move(out), {a, bias},
        [rows, cols](Node& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            if (pa.requires_grad) {
                Tensor& ga = pa.ensure_grad();
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
            }
            if (pb.requires_grad) {
                Tensor& gb = pb.ensure_grad();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) gb[j] += self.grad[i * cols + j];
            }
        },
        "add_row");
}

Var add(const Var& a, const Var& b) {
    return binary_op(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Var sub(const Var& a, const Var& b) {
    return binary_op(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

Var mul(const Var& a, const Var& b) {
    return binary_op(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, double, double y) { return g * y; },
        [](double g, double x, double) { return g * x; });
}

Var div(const Var& a, const Var& b) {
    return binary_op(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double g, double, double y) { return g / y; },
        [](double g, double x, double y) { return -g * x / (y * y); });
}

Var neg(const Var& a) {
    return unary_op(
        a, "neg", [](double x) { return -x; }, [](double g, double, double) { return -g; });
}

Var scale(const Var& a, double c) {
    return unary_op(
        a, "scale", [c](double x) { return c * x; }, [c](double g, double, double) { return c * g; });
}

Var add_const(const Var& a, double c) {
    return unary_op(
        a, "add_const", [c](double x) { return x + c; }, [](double g, double, double) { return g; });
}

Var vexp(const Var& a) {
    return unary_op(
        a, "exp", [](double x) { return std::exp(x); },
        [](double g, double, double y) { return g * y; });
}

Var vtanh(const Var& a) {
    return unary_op(
        a, "tanh", [](double x) { return std::tanh(x); },
        [](double g, double, double y) { return g * (1.0 - y * y); });
}

Var sigmoid(const Var& a) {
    return unary_op(
        a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double g, double, double y) { return g * y * (1.0 - y); });
}

Var leaky_relu(const Var& a, double slope) {
    return unary_op(
        a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double g, double x, double) { return x > 0.0 ? g : slope * g; });
}

Var vabs(const Var& a) {
    // Subgradient 0 at the kink.
    return unary_op(
        a, "abs", [](double x) { return std::fabs(x); },
        [](double g, double x, double) { return x > 0.0 ? g : (x < 0.0 ? -g : 0.0); });
}

Var square(const Var& a) {
    return unary_op(
        a, "square", [](double x) { return x * x; },
        [](double g, double x, double) { return 2.0 * g * x; });
}

Var vsqrt(const Var& a) {
    return unary_op(
        a, "sqrt", [](double x) { return std::sqrt(x); },
        [](double g, double, double y) { return 0.5 * g / y; });
}

Var safe_sqrt(const Var& a) {
    return unary_op(
        a, "safe_sqrt", [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; },
        [](double g, double x, double y) { return x > 0.0 ? 0.5 * g / y : 0.0; });
}

Var rsqrt(const Var& a) {
    return unary_op(
        a, "rsqrt", [](double x) { return 1.0 / std::sqrt(x); },
        [](double g, double x, double y) { return -0.5 * g * y / x; });
}

Var maximum(const Var& a, double c) {
    return unary_op(
        a, "maximum", [c](double x) { return x > c ? x : c; },
        [c](double g, double x, double) { return x > c ? g : 0.0; });
}

Var sum(const Var& a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    const std::size_t n = a.size();
    return make_op(
        Tensor::scalar_tensor(acc), {a},
        [n](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            const double g = self.grad[0];
            for (std::size_t i = 0; i < n; ++i) ga[i] += g;
        },
        "sum");
}

Var mean(const Var& a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    const std::size_t n = a.size();
    return make_op(
        Tensor::scalar_tensor(acc / static_cast<double>(n)), {a},
        [n](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            const double g = self.grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) ga[i] += g;
        },
        "mean");
}

Var row_sum(const Var& a) {
    const Tensor& av = a.value();
    if (av.shape.size() != 2) throw DimensionError("row_sum: expected rank-2 input");
    const std::size_t rows = av.shape[0], cols = av.shape[1];
    Tensor out({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += av[i * cols + j];
        out[i] = acc;
    }
    return make_op(
        std::move(out), {a},
        [rows, cols](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t i = 0; i < rows; ++i) {
                const double g = self.grad[i];
                for (std::size_t j = 0; j < cols; ++j) ga[i * cols + j] += g;
            }
        },
        "row_sum");
}

Var row_scale(const Var& a, const Var& s) {
    const Tensor& av = a.value();
    const Tensor& sv = s.value();
    if (av.shape.size() != 2 || sv.shape.size() != 1 || av.shape[0] != sv.shape[0])
        throw DimensionError("row_scale: incompatible shapes " + shape_str(av.shape) + " * " +
                             shape_str(sv.shape));
    const std::size_t rows = av.shape[0], cols = av.shape[1];
    Tensor out(av.shape);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = av[i * cols + j] * sv[i];
    return make_op(
        std::move(out), {a, s},
        [rows, cols](Node& self) {
            auto& pa = *self.parents[0];
            auto& ps = *self.parents[1];
            if (pa.requires_grad) {
                Tensor& ga = pa.ensure_grad();
                for (std::size_t i = 0; i < rows; ++i) {
                    const double si = ps.value[i];
                    for (std::size_t j = 0; j < cols; ++j)
                        ga[i * cols + j] += self.grad[i * cols + j] * si;
                }
            }
            if (ps.requires_grad) {
                Tensor& gs = ps.ensure_grad();
                for (std::size_t i = 0; i < rows; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < cols; ++j)
                        acc += self.grad[i * cols + j] * pa.value[i * cols + j];
                    gs[i] += acc;
                }
            }
        },
        "row_scale");
}

Var concat_cols(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[0] != bv.shape[0])
        throw DimensionError("concat_cols: incompatible shapes " + shape_str(av.shape) + " | " +
                             shape_str(bv.shape));
    const std::size_t rows = av.shape[0], ca = av.shape[1], cb = bv.shape[1];
    Tensor out({rows, ca + cb});
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < ca; ++j) out[i * (ca + cb) + j] = av[i * ca + j];
        for (std::size_t j = 0; j < cb; ++j) out[i * (ca + cb) + ca + j] = bv[i * cb + j];
    }
    return make_op(
        std::move(out), {a, b},
        [rows, ca, cb](Node& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            if (pa.requires_grad) {
                Tensor& ga = pa.ensure_grad();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < ca; ++j)
                        ga[i * ca + j] += self.grad[i * (ca + cb) + j];
            }
            if (pb.requires_grad) {
                Tensor& gb = pb.ensure_grad();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cb; ++j)
                        gb[i * cb + j] += self.grad[i * (ca + cb) + ca + j];
            }
        },
        "concat_cols");
}

Var slice_cols(const Var& a, std::size_t lo, std::size_t hi) {
    const Tensor& av = a.value();
    if (av.shape.size() != 2 || lo >= hi || hi > av.shape[1])
        throw DimensionError("slice_cols: invalid range");
    const std::size_t rows = av.shape[0], cols = av.shape[1], width = hi - lo;
    Tensor out({rows, width});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < width; ++j) out[i * width + j] = av[i * cols + lo + j];
    return make_op(
        std::move(out), {a},
        [rows, cols, lo, width](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < width; ++j)
                    ga[i * cols + lo + j] += self.grad[i * width + j];
        },
        "slice_cols");
}

Var select_rows(const Var& a, const std::vector<std::size_t>& rows_idx) {
    const Tensor& av = a.value();
    if (av.shape.size() != 2) throw DimensionError("select_rows: expected rank-2 input");
    const std::size_t cols = av.shape[1];
    for (std::size_t r : rows_idx)
        if (r >= av.shape[0]) throw DimensionError("select_rows: row index out of range");
    Tensor out({rows_idx.size(), cols});
    for (std::size_t i = 0; i < rows_idx.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = av[rows_idx[i] * cols + j];
    return make_op(
        std::move(out), {a},
        [rows_idx, cols](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t i = 0; i < rows_idx.size(); ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    ga[rows_idx[i] * cols + j] += self.grad[i * cols + j];
        },
        "select_rows");
}

Var reshape(const Var& a, Shape shape) {
    if (numel(shape) != a.size())
        throw DimensionError("reshape: element count mismatch for " + shape_str(shape));
    Tensor out(std::move(shape), a.value().data);
    return make_op(
        std::move(out), {a},
        [](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
        },
        "reshape");
}

Var box_mean(const Var& a, std::size_t h, std::size_t w, std::size_t win) {
    const Tensor& av = a.value();
    if (av.shape.size() != 2 || av.shape[1] != h * w)
        throw DimensionError("box_mean: input is not [B," + std::to_string(h * w) + "]");
    if (win == 0 || h < win || w < win)
        throw ContractError("box_mean: image smaller than window");
    const std::size_t batch = av.shape[0];
    const std::size_t oh = h - win + 1, ow = w - win + 1;
    const double inv = 1.0 / static_cast<double>(win * win);
    Tensor out({batch, oh * ow});
    std::vector<double> tmp(h * ow);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* img = av.data.data() + b * h * w;
        // Horizontal window sums, then vertical.
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (std::size_t dx = 0; dx < win; ++dx) acc += img[y * w + ox + dx];
                tmp[y * ow + ox] = acc;
            }
        }
        double* dst = out.data.data() + b * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (std::size_t dy = 0; dy < win; ++dy) acc += tmp[(oy + dy) * ow + ox];
                dst[oy * ow + ox] = acc * inv;
            }
        }
    }
    return make_op(
        std::move(out), {a},
        [batch, h, w, win, oh, ow, inv](Node& self) {
            auto& pa = *self.parents[0];
            if (!pa.requires_grad) return;
            Tensor& ga = pa.ensure_grad();
            for (std::size_t b = 0; b < batch; ++b) {
                const double* g = self.grad.data.data() + b * oh * ow;
                double* gx = ga.data.data() + b * h * w;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const double gv = g[oy * ow + ox] * inv;
                        for (std::size_t dy = 0; dy < win; ++dy)
                            for (std::size_t dx = 0; dx < win; ++dx)
                                gx[(oy + dy) * w + ox + dx] += gv;
                    }
                }
            }
        },
        "box_mean");
}

Var cos_rows(const Var& a, const Var& b) {
    check_matching(a, b, "cos_rows");
    Var dot = row_sum(mul(a, b));
    Var na2 = row_sum(square(a));
    Var nb2 = row_sum(square(b));
    for (double v : na2.value().data)
        if (v == 0.0) throw ContractError("cos_rows: zero-norm row");
    for (double v : nb2.value().data)
        if (v == 0.0) throw ContractError("cos_rows: zero-norm row");
    return div(dot, vsqrt(mul(na2, nb2)));
}

Var normalize_rows(const Var& a) {
    Var n2 = row_sum(square(a));
    for (double v : n2.value().data)
        if (v == 0.0) throw ContractError("normalize_rows: zero-norm row");
    return row_scale(a, rsqrt(n2));
}

Var l1_mean(const Var& a, const Var& b) {
    check_matching(a, b, "l1_mean");
    return mean(vabs(sub(a, b)));
}

}  // namespace ifadit
