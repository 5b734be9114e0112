// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "fairkd/errors.hpp"

namespace fairkd {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
}

std::string shape_to_string(const Shape& s);

/// n-dimensional array of doubles with an optional gradient buffer.
/// Tensor is a shared handle: copies alias the same storage, which is what
/// lets a recorded graph and an optimizer see the same parameter.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(d_); }

    const Shape& shape() const { return d_->shape; }
    std::size_t numel() const { return d_->data.size(); }
    std::size_t rank() const { return d_->shape.size(); }

    std::vector<double>& data() { return d_->data; }
    const std::vector<double>& data() const { return d_->data; }

    double value() const; // numel()==1 accessor
    double at(std::size_t i) const { return d_->data[i]; }
    double at(std::size_t i, std::size_t j) const { return d_->data[i * d_->shape[1] + j]; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool rg) { d_->requires_grad = rg; }

    bool has_grad() const { return !d_->grad.empty(); }
    std::vector<double>& grad();             // allocates zeros on first use
    const std::vector<double>& grad() const; // throws if absent
    void zero_grad();                        // zero-fills (allocating if needed)
    void drop_grad() { d_->grad.clear(); }   // deallocates (has_grad -> false)

    /// True when both handles point at the same storage.
    bool same_storage(const Tensor& other) const { return d_ == other.d_; }

    /// Deep copy; gradient buffer is not copied.
    Tensor clone() const;

private:
    struct Data {
        Shape shape;
        std::vector<double> data;
        std::vector<double> grad; // empty until requested
        bool requires_grad = false;
    };
    std::shared_ptr<Data> d_;
};

} // namespace fairkd
