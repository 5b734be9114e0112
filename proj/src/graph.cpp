// SPDX-License-Identifier: Apache-2.0
#include "fairkd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairkd/errors.hpp"
#include "fairkd/kernels.hpp"

namespace fairkd {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Equal shapes, or one operand with a single element (scalar broadcast).
void check_binary(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return;
    if (a.numel() == 1 || b.numel() == 1) return;
    throw DimensionError(std::string(op) + ": shapes " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()) +
                         " differ and neither is scalar");
}

Shape binary_out_shape(const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return a.shape();
    return a.numel() == 1 ? b.shape() : a.shape();
}

} // namespace

void Graph::record(Tensor out, std::function<void()> back) {
    nodes_.push_back({std::move(out), std::move(back)});
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
        throw DimensionError("matmul: incompatible shapes " + shape_to_string(a.shape()) +
                             " and " + shape_to_string(b.shape()));
    }
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros({m, n}, rg);
    kern::mm_nn(a.data().data(), b.data().data(), out.data().data(), m, k, n);
    if (rg) {
        record(out, [a = a, b = b, out, m, k, n]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad())
                kern::mm_abt_acc(g.data(), b.data().data(), a.grad().data(), m, n, k);
            if (b.requires_grad())
                kern::mm_atb_acc(a.data().data(), g.data(), b.grad().data(), m, k, n);
        });
    }
    return out;
}

Tensor Graph::conv2d(const Tensor& x, const Tensor& kernels) {
    if (x.rank() != 3 || kernels.rank() != 4) {
        throw DimensionError("conv2d: expected input [c,h,w] and kernels [co,ci,kh,kw], got " +
                             shape_to_string(x.shape()) + " and " +
                             shape_to_string(kernels.shape()));
    }
    const std::size_t cin = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const std::size_t cout = kernels.shape()[0], kh = kernels.shape()[2], kw = kernels.shape()[3];
    if (kernels.shape()[1] != cin) {
        throw DimensionError("conv2d: input has " + std::to_string(cin) +
                             " channels but kernels expect " + std::to_string(kernels.shape()[1]));
    }
    if (h < kh || w < kw) {
        throw DimensionError("conv2d: image " + shape_to_string(x.shape()) +
                             " smaller than kernel " + shape_to_string(kernels.shape()));
    }
    const bool rg = x.requires_grad() || kernels.requires_grad();
    Tensor out = Tensor::zeros({cout, h - kh + 1, w - kw + 1}, rg);
    kern::conv2d_valid(x.data().data(), kernels.data().data(), out.data().data(),
                       cin, h, w, cout, kh, kw);
    if (rg) {
        record(out, [x = x, kernels = kernels, out, cin, h, w, cout, kh, kw]() mutable {
            const auto& g = out.grad();
            if (x.requires_grad())
                kern::conv2d_input_grad_acc(g.data(), kernels.data().data(), x.grad().data(),
                                            cin, h, w, cout, kh, kw);
            if (kernels.requires_grad())
                kern::conv2d_kernel_grad_acc(g.data(), x.data().data(), kernels.grad().data(),
                                             cin, h, w, cout, kh, kw);
        });
    }
    return out;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
    check_binary("add", a, b);
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(binary_out_shape(a, b), rg);
    const std::size_t n = out.numel();
    const bool as = a.numel() == 1, bs = b.numel() == 1 && n != 1;
    for (std::size_t i = 0; i < n; ++i)
        out.data()[i] = a.data()[as ? 0 : i] + b.data()[bs ? 0 : i];
    if (rg) {
        record(out, [a = a, b = b, out, n]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad()) {
                if (a.numel() == n)
                    for (std::size_t i = 0; i < n; ++i) a.grad()[i] += g[i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i];
                    a.grad()[0] += s;
                }
            }
            if (b.requires_grad()) {
                if (b.numel() == n)
                    for (std::size_t i = 0; i < n; ++i) b.grad()[i] += g[i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i];
                    b.grad()[0] += s;
                }
            }
        });
    }
    return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
    check_binary("sub", a, b);
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(binary_out_shape(a, b), rg);
    const std::size_t n = out.numel();
    const bool as = a.numel() == 1 && n != 1, bs = b.numel() == 1 && n != 1;
    for (std::size_t i = 0; i < n; ++i)
        out.data()[i] = a.data()[as ? 0 : i] - b.data()[bs ? 0 : i];
    if (rg) {
        record(out, [a = a, b = b, out, n]() mutable {
            const auto& g = out.grad();
            if (a.requires_grad()) {
                if (a.numel() == n)
                    for (std::size_t i = 0; i < n; ++i) a.grad()[i] += g[i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i];
                    a.grad()[0] += s;
                }
            }
            if (b.requires_grad()) {
                if (b.numel() == n)
                    for (std::size_t i = 0; i < n; ++i) b.grad()[i] -= g[i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i];
                    b.grad()[0] -= s;
                }
            }
        });
    }
    return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
    check_binary("mul", a, b);
    const bool rg = a.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(binary_out_shape(a, b), rg);
    const std::size_t n = out.numel();
    const bool as = a.numel() == 1 && n != 1, bs = b.numel() == 1 && n != 1;
    for (std::size_t i = 0; i < n; ++i)
        out.data()[i] = a.data()[as ? 0 : i] * b.data()[bs ? 0 : i];
    if (rg) {
        record(out, [a = a, b = b, out, n]() mutable {
            const auto& g = out.grad();
            const bool as2 = a.numel() != n, bs2 = b.numel() != n;
            if (a.requires_grad()) {
                if (!as2)
                    for (std::size_t i = 0; i < n; ++i) a.grad()[i] += g[i] * b.data()[bs2 ? 0 : i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i] * b.data()[bs2 ? 0 : i];
                    a.grad()[0] += s;
                }
            }
            if (b.requires_grad()) {
                if (!bs2)
                    for (std::size_t i = 0; i < n; ++i) b.grad()[i] += g[i] * a.data()[as2 ? 0 : i];
                else {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += g[i] * a.data()[as2 ? 0 : i];
                    b.grad()[0] += s;
                }
            }
        });
    }
    return out;
}

Tensor Graph::add_const(const Tensor& a, double c) {
    const bool rg = a.requires_grad();
    Tensor out = Tensor::zeros(a.shape(), rg);
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + c;
    if (rg) {
        record(out, [a = a, out]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
        });
    }
    return out;
}

Tensor Graph::mul_const(const Tensor& a, double c) {
    const bool rg = a.requires_grad();
    Tensor out = Tensor::zeros(a.shape(), rg);
    for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * c;
    if (rg) {
        record(out, [a = a, out, c]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += c * g[i];
        });
    }
    return out;
}

Tensor Graph::sigmoid(const Tensor& x) {
    const bool rg = x.requires_grad();
    Tensor out = Tensor::zeros(x.shape(), rg);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data()[i] = stable_sigmoid(x.data()[i]);
    if (rg) {
        record(out, [x = x, out]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = out.data()[i];
                x.grad()[i] += g[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

Tensor Graph::log(const Tensor& x) {
    const bool rg = x.requires_grad();
    Tensor out = Tensor::zeros(x.shape(), rg);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double xi = x.data()[i];
        out.data()[i] = std::log(xi < kLogClamp ? kLogClamp : xi);
    }
    if (rg) {
        // Below the clamp the forward value is constant, so the gradient is 0.
        record(out, [x = x, out]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double xi = x.data()[i];
                if (xi >= kLogClamp) x.grad()[i] += g[i] / xi;
            }
        });
    }
    return out;
}

Tensor Graph::relu(const Tensor& x) {
    const bool rg = x.requires_grad();
    Tensor out = Tensor::zeros(x.shape(), rg);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double xi = x.data()[i];
        out.data()[i] = xi > 0.0 ? xi : 0.0;
    }
    if (rg) {
        record(out, [x = x, out]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x.data()[i] > 0.0) x.grad()[i] += g[i];
        });
    }
    return out;
}

Tensor Graph::softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw DimensionError("softmax: axis " + std::to_string(axis) +
                             " out of range for shape " + shape_to_string(x.shape()));
    }
    const Shape& s = x.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t len = s[axis];

    const bool rg = x.requires_grad();
    Tensor out = Tensor::zeros(s, rg);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const auto at = [&](std::size_t j) { return (o * len + j) * inner + in; };
            double mx = x.data()[at(0)];
            for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, x.data()[at(j)]);
            double sum = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                const double e = std::exp(x.data()[at(j)] - mx);
                out.data()[at(j)] = e;
                sum += e;
            }
            for (std::size_t j = 0; j < len; ++j) out.data()[at(j)] /= sum;
        }
    }
    if (rg) {
        record(out, [x = x, out, outer, inner, len]() mutable {
            const auto& g = out.grad();
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < inner; ++in) {
                    const auto at = [&](std::size_t j) { return (o * len + j) * inner + in; };
                    double dot = 0.0;
                    for (std::size_t j = 0; j < len; ++j) dot += g[at(j)] * out.data()[at(j)];
                    for (std::size_t j = 0; j < len; ++j)
                        x.grad()[at(j)] += out.data()[at(j)] * (g[at(j)] - dot);
                }
            }
        });
    }
    return out;
}

Tensor Graph::mean(const Tensor& x) {
    const std::size_t n = x.numel();
    if (n == 0) throw ContractError("mean: empty tensor");
    const bool rg = x.requires_grad();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x.data()[i];
    Tensor out = Tensor::from_data({1}, {s / static_cast<double>(n)}, rg);
    if (rg) {
        record(out, [x = x, out, n]() mutable {
            const double g = out.grad()[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) x.grad()[i] += g;
        });
    }
    return out;
}

Tensor Graph::global_avg_pool(const Tensor& x) {
    if (x.rank() != 3) {
        throw DimensionError("global_avg_pool: expected [c,h,w], got " +
                             shape_to_string(x.shape()));
    }
    const std::size_t c = x.shape()[0], hw = x.shape()[1] * x.shape()[2];
    const bool rg = x.requires_grad();
    Tensor out = Tensor::zeros({1, c}, rg);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) s += x.data()[ch * hw + i];
        out.data()[ch] = s / static_cast<double>(hw);
    }
    if (rg) {
        record(out, [x = x, out, c, hw]() mutable {
            const auto& g = out.grad();
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double gv = g[ch] / static_cast<double>(hw);
                for (std::size_t i = 0; i < hw; ++i) x.grad()[ch * hw + i] += gv;
            }
        });
    }
    return out;
}

Tensor Graph::flatten(const Tensor& x) {
    const bool rg = x.requires_grad();
    Tensor out = Tensor::from_data({1, x.numel()}, x.data(), rg);
    if (rg) {
        record(out, [x = x, out]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += g[i];
        });
    }
    return out;
}

Tensor Graph::stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: no rows given");
    const std::size_t n = rows[0].numel();
    bool rg = false;
    for (const Tensor& r : rows) {
        if (r.numel() != n) {
            throw DimensionError("stack_rows: row sizes differ: " + std::to_string(n) +
                                 " vs " + std::to_string(r.numel()));
        }
        rg = rg || r.requires_grad();
    }
    const std::size_t k = rows.size();
    Tensor out = Tensor::zeros({k, n}, rg);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data()[i * n + j] = rows[i].data()[j];
    if (rg) {
        record(out, [rows = rows, out, k, n]() mutable {
            const auto& g = out.grad();
            for (std::size_t i = 0; i < k; ++i) {
                Tensor r = rows[i];
                if (!r.requires_grad()) continue;
                for (std::size_t j = 0; j < n; ++j) r.grad()[j] += g[i * n + j];
            }
        });
    }
    return out;
}

Tensor Graph::bias_channels(const Tensor& x, const Tensor& b) {
    if (x.rank() != 3 || b.rank() != 1 || b.shape()[0] != x.shape()[0]) {
        throw DimensionError("bias_channels: expected [c,h,w] and [c], got " +
                             shape_to_string(x.shape()) + " and " + shape_to_string(b.shape()));
    }
    const std::size_t c = x.shape()[0], hw = x.shape()[1] * x.shape()[2];
    const bool rg = x.requires_grad() || b.requires_grad();
    Tensor out = Tensor::zeros(x.shape(), rg);
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < hw; ++i)
            out.data()[ch * hw + i] = x.data()[ch * hw + i] + b.data()[ch];
    if (rg) {
        record(out, [x = x, b = b, out, c, hw]() mutable {
            const auto& g = out.grad();
            if (x.requires_grad())
                for (std::size_t i = 0; i < c * hw; ++i) x.grad()[i] += g[i];
            if (b.requires_grad()) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < hw; ++i) s += g[ch * hw + i];
                    b.grad()[ch] += s;
                }
            }
        });
    }
    return out;
}

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward: loss must be a scalar tensor");
    }
    Tensor l = loss;
    l.grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (!it->out.has_grad()) continue;
        it->back();
        it->out.drop_grad();
    }
}

} // namespace fairkd
