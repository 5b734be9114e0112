// SPDX-License-Identifier: Apache-2.0
#include "fairkd/tensor.hpp"

#include <sstream>

namespace fairkd {

std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    std::size_t n = shape_numel(shape);
    t.d_->shape = std::move(shape);
    t.d_->data.assign(n, 0.0);
    t.d_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.d_->data) x = value;
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != data.size()) {
        throw DimensionError("from_data: shape " + shape_to_string(shape) + " wants " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(data.size()));
    }
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = std::move(shape);
    t.d_->data = std::move(data);
    t.d_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

double Tensor::value() const {
    if (numel() != 1) {
        throw DimensionError("value(): tensor has shape " + shape_to_string(shape()) +
                             ", expected a single element");
    }
    return d_->data[0];
}

std::vector<double>& Tensor::grad() {
    if (d_->grad.empty()) d_->grad.assign(d_->data.size(), 0.0);
    return d_->grad;
}

const std::vector<double>& Tensor::grad() const {
    if (d_->grad.empty()) {
        throw ContractError("grad(): gradient buffer was never allocated for shape " +
                            shape_to_string(shape()));
    }
    return d_->grad;
}

void Tensor::zero_grad() {
    d_->grad.assign(d_->data.size(), 0.0);
}

Tensor Tensor::clone() const {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = d_->shape;
    t.d_->data = d_->data;
    t.d_->requires_grad = d_->requires_grad;
    return t;
}

} // namespace fairkd
