#include "ifadit/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "ifadit/error.hpp"

namespace ifadit {

namespace {
std::atomic<Precision> g_precision{Precision::f32};
}

Precision precision() { return g_precision.load(std::memory_order_relaxed); }
void set_precision(Precision p) { g_precision.store(p, std::memory_order_relaxed); }

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s) : shape(std::move(s)), data(numel(shape), 0.0) {
    for (std::size_t d : shape)
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
}

Tensor::Tensor(Shape s, double fill) : Tensor(std::move(s)) {
    for (auto& v : data) v = fill;
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
    for (std::size_t d : shape)
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
    if (data.size() != numel(shape))
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
}

std::size_t Tensor::rows() const { return shape.empty() ? 1 : shape.front(); }

std::size_t Tensor::cols() const {
    if (shape.empty()) return 1;
    std::size_t n = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) n *= shape[i];
    return n;
}

double Tensor::scalar() const {
    if (size() != 1) throw ContractError("expected a scalar tensor, got shape " + shape_str(shape));
    return data[0];
}

void Tensor::fill(double v) {
    for (auto& x : data) x = v;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!same_shape(a, b))
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
}

double quantize_value(double v) {
    if (precision() == Precision::f32) return static_cast<double>(static_cast<float>(v));
    return v;
}

void quantize_inplace(Tensor& t) {
    if (precision() != Precision::f32) return;
    for (auto& v : t.data) v = static_cast<double>(static_cast<float>(v));
}

void require_finite(const Tensor& t, const char* context) {
    for (double v : t.data) {
        if (!std::isfinite(v))
            throw NumericError(std::string(context) + ": non-finite value encountered");
    }
}

}  // namespace ifadit
