#pragma once

// Shared test utilities: finite-difference gradient checking and small
// dataset builders. Test-only; independent of the library's backward path.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "curvete/nn.hpp"
#include "curvete/tensor.hpp"

namespace curvete::testing {

// Relative error with a unit floor, so tiny gradients are compared on an
// absolute scale: |a-b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;  // "param 3 elem 17"
    int checked = 0;
};

// Central finite differences over every parameter element of `params`,
// where `loss_fn` re-runs the full forward pass. h = 1e-3 per the check
// contract; gradients must already be computed analytically by the caller.
inline GradCheckResult finite_diff_check(std::vector<curvete::Tensor*> params,
                                         const std::vector<curvete::Tensor>& analytic,
                                         const std::function<double()>& loss_fn,
                                         double h = 1e-3) {
    GradCheckResult res;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        curvete::Tensor& p = *params[pi];
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            const float saved = p.data[j];
            p.data[j] = static_cast<float>(saved + h);
            const double lp = loss_fn();
            p.data[j] = static_cast<float>(saved - h);
            const double lm = loss_fn();
            p.data[j] = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = analytic[pi].data[j];
            const double e = rel_err(an, fd);
            ++res.checked;
            if (e > res.max_rel_err) {
                res.max_rel_err = e;
                res.worst = "param " + std::to_string(pi) + " elem " + std::to_string(j);
            }
        }
    }
    return res;
}

inline int count_params(const std::vector<curvete::Tensor*>& params) {
    int n = 0;
    for (const auto* p : params) n += static_cast<int>(p->data.size());
    return n;
}

// Finite differencing a network with relu/maxpool is only valid away from the
// kinks: a perturbed weight must not flip any relu sign or pool argmax.
// Returns the smallest such margin for the last recorded forward pass
// (min |relu input| and min pool max-vs-runner-up gap); test points are
// accepted only when this is comfortably larger than the step h.
inline double kink_margin(const curvete::LayerStack& stack) {
    double margin = std::numeric_limits<double>::infinity();
    const auto& specs = stack.specs();
    for (int i = 0; i < static_cast<int>(specs.size()); ++i) {
        const curvete::Tensor& in = stack.activation_after(i - 1);
        if (specs[static_cast<std::size_t>(i)].kind == curvete::LayerKind::relu) {
            for (const float v : in.data) margin = std::min(margin, static_cast<double>(std::fabs(v)));
        } else if (specs[static_cast<std::size_t>(i)].kind == curvete::LayerKind::maxpool) {
            const int ps = specs[static_cast<std::size_t>(i)].pool_size;
            const auto din = stack.dims_after(i - 1);
            const auto dout = stack.dims_after(i);
            const int n = in.shape[0];
            for (int im = 0; im < n; ++im) {
                for (int c = 0; c < din.c; ++c) {
                    for (int oy = 0; oy < dout.h; ++oy) {
                        for (int ox = 0; ox < dout.w; ++ox) {
                            float best = -std::numeric_limits<float>::infinity();
                            float second = best;
                            for (int py = 0; py < ps; ++py) {
                                for (int px = 0; px < ps; ++px) {
                                    const float v =
                                        in.at4(im, c, oy * ps + py, ox * ps + px, din.c, din.h, din.w);
                                    if (v > best) {
                                        second = best;
                                        best = v;
                                    } else if (v > second) {
                                        second = v;
                                    }
                                }
                            }
                            if (std::isfinite(second)) margin = std::min(margin, static_cast<double>(best - second));
                        }
                    }
                }
            }
        }
    }
    return margin;
}

}  // namespace curvete::testing
