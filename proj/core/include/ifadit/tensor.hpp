#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ifadit {

// Global numeric precision. float32 is the training default: tensor entries
// are rounded to the nearest float32 value at every public operation
// boundary (accumulations run in double), so persisted float32 artifacts
// round-trip bitwise. float64 disables the rounding and is used for
// gradient checks and invertibility tests.
enum class Precision { f32, f64 };

Precision precision();
void set_precision(Precision p);

// RAII precision override for tests and gradient checks.
class PrecisionGuard {
  public:
    explicit PrecisionGuard(Precision p) : saved_(precision()) { set_precision(p); }
    ~PrecisionGuard() { set_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

  private:
    Precision saved_;
};

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major float tensor. Data is stored as double; in float32 mode
// every public operation leaves entries exactly float32-representable.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s);
    Tensor(Shape s, double fill);
    Tensor(Shape s, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rows() const;  // first dimension (1 for rank-0/scalar)
    std::size_t cols() const;  // product of remaining dimensions

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // Scalar access; throws unless the tensor holds exactly one entry.
    double scalar() const;

    void fill(double v);

    static Tensor zeros(Shape s) { return Tensor(std::move(s), 0.0); }
    static Tensor scalar_tensor(double v) { return Tensor({1}, {v}); }
};

bool same_shape(const Tensor& a, const Tensor& b);

// Throws DimensionError unless shapes match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Rounds every entry through float32 when the global mode is f32.
void quantize_inplace(Tensor& t);
double quantize_value(double v);

// Throws NumericError if any entry is NaN/Inf.
void require_finite(const Tensor& t, const char* context);

}  // namespace ifadit
