#include "curvete/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

namespace curvete {

namespace {

std::vector<int> act_shape(int n, const Dims& d) {
    if (d.h == 1 && d.w == 1) return {n, d.c};
    return {n, d.c, d.h, d.w};
}

int batch_of(const Tensor& t, const Dims& expected, const std::string& what) {
    if (t.shape.size() == 2) {
        if (expected.flat() != t.shape[1]) {
            throw ConfigError(what + ": batch shape " + t.shape_str() + " does not match expected flat dim " +
                              std::to_string(expected.flat()));
        }
        return t.shape[0];
    }
    if (t.shape.size() == 4) {
        if (t.shape[1] != expected.c || t.shape[2] != expected.h || t.shape[3] != expected.w) {
            throw ConfigError(what + ": batch shape " + t.shape_str() + " does not match expected [n," +
                              std::to_string(expected.c) + "," + std::to_string(expected.h) + "," +
                              std::to_string(expected.w) + "]");
        }
        return t.shape[0];
    }
    throw ConfigError(what + ": batch must be rank 2 or 4, got " + t.shape_str());
}

}  // namespace

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dense: return "dense";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::upsample2x: return "upsample2x";
    }
    return "?";
}

LayerSpec LayerSpec::conv2d(int filters, int kh, int kw, int stride, int padding) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.filters = filters;
    s.kernel_h = kh;
    s.kernel_w = kw;
    s.stride = stride;
    s.padding = padding;
    return s;
}
LayerSpec LayerSpec::relu() { return LayerSpec{LayerKind::relu}; }
LayerSpec LayerSpec::maxpool(int size) {
    LayerSpec s;
    s.kind = LayerKind::maxpool;
    s.pool_size = size;
    return s;
}
LayerSpec LayerSpec::flatten() { return LayerSpec{LayerKind::flatten}; }
LayerSpec LayerSpec::dense(int out_dim) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.out_dim = out_dim;
    return s;
}
LayerSpec LayerSpec::sigmoid() { return LayerSpec{LayerKind::sigmoid}; }
LayerSpec LayerSpec::upsample2x() { return LayerSpec{LayerKind::upsample2x}; }

std::string LayerSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case LayerKind::conv2d:
            os << "conv:" << filters << "," << kernel_h << "x" << kernel_w << ",s" << stride << ",p" << padding;
            break;
        case LayerKind::maxpool: os << "maxpool:" << pool_size; break;
        case LayerKind::dense: os << "dense:" << out_dim; break;
        default: os << layer_kind_name(kind); break;
    }
    return os.str();
}

std::vector<LayerSpec> parse_layer_specs(const std::string& text) {
    std::vector<LayerSpec> specs;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        const auto bad = [&](const std::string& why) {
            return ParseError("layer spec token '" + tok + "': " + why);
        };
        if (tok == "relu") {
            specs.push_back(LayerSpec::relu());
        } else if (tok == "flatten") {
            specs.push_back(LayerSpec::flatten());
        } else if (tok == "sigmoid") {
            specs.push_back(LayerSpec::sigmoid());
        } else if (tok == "upsample2x") {
            specs.push_back(LayerSpec::upsample2x());
        } else if (tok.rfind("maxpool:", 0) == 0) {
            const int s = std::atoi(tok.c_str() + 8);
            if (s < 1) throw bad("pool size must be >= 1");
            specs.push_back(LayerSpec::maxpool(s));
        } else if (tok.rfind("dense:", 0) == 0) {
            const int d = std::atoi(tok.c_str() + 6);
            if (d < 1) throw bad("dense width must be >= 1");
            specs.push_back(LayerSpec::dense(d));
        } else if (tok.rfind("conv:", 0) == 0) {
            // conv:F,KhxKw[,sS][,pP]
            int f = 0, kh = 0, kw = 0, stride = 1, pad = 0;
            std::string body = tok.substr(5);
            for (auto& ch : body)
                if (ch == ',') ch = ' ';
            std::istringstream bs(body);
            std::string part;
            int idx = 0;
            while (bs >> part) {
                if (idx == 0) {
                    f = std::atoi(part.c_str());
                } else if (idx == 1) {
                    const auto x = part.find('x');
                    if (x == std::string::npos) throw bad("kernel must be KhxKw");
                    kh = std::atoi(part.substr(0, x).c_str());
                    kw = std::atoi(part.substr(x + 1).c_str());
                } else if (part.size() > 1 && part[0] == 's') {
                    stride = std::atoi(part.c_str() + 1);
                } else if (part.size() > 1 && part[0] == 'p') {
                    pad = std::atoi(part.c_str() + 1);
                } else {
                    throw bad("unknown conv option '" + part + "'");
                }
                ++idx;
            }
            if (f < 1 || kh < 1 || kw < 1 || stride < 1 || pad < 0) throw bad("invalid conv parameters");
            specs.push_back(LayerSpec::conv2d(f, kh, kw, stride, pad));
        } else {
            throw bad("unknown layer kind");
        }
    }
    if (specs.empty()) throw ParseError("layer spec string is empty");
    return specs;
}

std::string layer_specs_to_string(const std::vector<LayerSpec>& specs) {
    std::string out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i) out += " ";
        out += specs[i].to_string();
    }
    return out;
}

LayerStack::LayerStack(std::vector<LayerSpec> specs, Dims input, std::uint64_t init_seed)
    : specs_(std::move(specs)), input_(input) {
    if (input_.c < 1 || input_.h < 1 || input_.w < 1) {
        throw ConfigError("layer stack input dims must be positive");
    }
    validate_and_infer_shapes();
    init_parameters(init_seed);
}

void LayerStack::validate_and_infer_shapes() {
    dims_.clear();
    dims_.push_back(input_);
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& s = specs_[i];
        const Dims in = dims_.back();
        const auto fail = [&](const std::string& why) {
            return ConfigError("layer " + std::to_string(i) + " (" + layer_kind_name(s.kind) + "): " + why);
        };
        Dims out = in;
        switch (s.kind) {
            case LayerKind::conv2d: {
                if (s.filters < 1 || s.kernel_h < 1 || s.kernel_w < 1 || s.stride < 1 || s.padding < 0)
                    throw fail("invalid conv parameters");
                if (in.h == 1 && in.w == 1 && in.c > 1 && i > 0 && specs_[i - 1].kind == LayerKind::flatten)
                    throw fail("conv after flatten");
                out.c = s.filters;
                out.h = (in.h + 2 * s.padding - s.kernel_h) / s.stride + 1;
                out.w = (in.w + 2 * s.padding - s.kernel_w) / s.stride + 1;
                if (in.h + 2 * s.padding < s.kernel_h || in.w + 2 * s.padding < s.kernel_w)
                    throw fail("kernel larger than padded input " + std::to_string(in.h) + "x" +
                               std::to_string(in.w));
                break;
            }
            case LayerKind::maxpool: {
                if (s.pool_size < 1) throw fail("pool size must be >= 1");
                if (in.h < s.pool_size || in.w < s.pool_size)
                    throw fail("pool window exceeds input " + std::to_string(in.h) + "x" + std::to_string(in.w));
                out.h = in.h / s.pool_size;
                out.w = in.w / s.pool_size;
                break;
            }
            case LayerKind::flatten: {
                out.c = in.flat();
                out.h = 1;
                out.w = 1;
                break;
            }
            case LayerKind::dense: {
                if (s.out_dim < 1) throw fail("dense width must be >= 1");
                if (in.h != 1 || in.w != 1) throw fail("dense requires flat input; add flatten first");
                out.c = s.out_dim;
                break;
            }
            case LayerKind::upsample2x: {
                out.h = in.h * 2;
                out.w = in.w * 2;
                break;
            }
            case LayerKind::relu:
            case LayerKind::sigmoid: break;
        }
        if (out.c < 1 || out.h < 1 || out.w < 1) throw fail("produces empty output");
        dims_.push_back(out);
    }
}

void LayerStack::init_parameters(std::uint64_t seed) {
    weights_.assign(specs_.size(), Tensor{});
    biases_.assign(specs_.size(), Tensor{});
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& s = specs_[i];
        const Dims in = dims_[i];
        Rng rng(derive_seed(seed, "layer-init", i));
        if (s.kind == LayerKind::conv2d) {
            const int fan_in = in.c * s.kernel_h * s.kernel_w;
            const float bound = static_cast<float>(std::sqrt(6.0 / fan_in));
            weights_[i] = Tensor::zeros({s.filters, in.c, s.kernel_h, s.kernel_w});
            for (auto& w : weights_[i].data) w = static_cast<float>(rng.uniform(-bound, bound));
            biases_[i] = Tensor::zeros({s.filters});
        } else if (s.kind == LayerKind::dense) {
            const int fan_in = in.c;
            const float bound = static_cast<float>(std::sqrt(6.0 / fan_in));
            weights_[i] = Tensor::zeros({s.out_dim, fan_in});
            for (auto& w : weights_[i].data) w = static_cast<float>(rng.uniform(-bound, bound));
            biases_[i] = Tensor::zeros({s.out_dim});
        }
    }
}

std::vector<Tensor*> LayerStack::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (weights_[i].numel() > 0) {
            out.push_back(&weights_[i]);
            out.push_back(&biases_[i]);
        }
    }
    return out;
}

std::vector<const Tensor*> LayerStack::parameters() const {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (weights_[i].numel() > 0) {
            out.push_back(&weights_[i]);
            out.push_back(&biases_[i]);
        }
    }
    return out;
}

std::vector<std::string> LayerStack::parameter_names(const std::string& prefix) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (weights_[i].numel() > 0) {
            const std::string base = prefix + "." + std::to_string(i) + "." + layer_kind_name(specs_[i].kind);
            out.push_back(base + ".w");
            out.push_back(base + ".b");
        }
    }
    return out;
}

Tensor LayerStack::forward(const Tensor& batch) {
    const int n = batch_of(batch, input_, "forward");
    if (n < 1) throw InputError("forward: empty batch");

    acts_.assign(specs_.size() + 1, Tensor{});
    pool_argmax_.assign(specs_.size(), {});
    acts_[0] = batch;
    acts_[0].shape = act_shape(n, input_);

    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& s = specs_[i];
        const Dims in = dims_[i];
        const Dims out = dims_[i + 1];
        const Tensor& x = acts_[i];
        Tensor y = Tensor::zeros(act_shape(n, out));

        switch (s.kind) {
            case LayerKind::conv2d: {
                const Tensor& W = weights_[i];
                const Tensor& b = biases_[i];
                for (int im = 0; im < n; ++im) {
                    for (int oc = 0; oc < out.c; ++oc) {
                        const double bv = b[static_cast<std::size_t>(oc)];
                        for (int oy = 0; oy < out.h; ++oy) {
                            for (int ox = 0; ox < out.w; ++ox) {
                                double acc = bv;
                                for (int ic = 0; ic < in.c; ++ic) {
                                    for (int ky = 0; ky < s.kernel_h; ++ky) {
                                        const int iy = oy * s.stride + ky - s.padding;
                                        if (iy < 0 || iy >= in.h) continue;
                                        const std::size_t in_base =
                                            static_cast<std::size_t>(((im * in.c + ic) * in.h + iy) * in.w);
                                        const std::size_t w_base = static_cast<std::size_t>(
                                            ((oc * in.c + ic) * s.kernel_h + ky) * s.kernel_w);
                                        for (int kx = 0; kx < s.kernel_w; ++kx) {
                                            const int ix = ox * s.stride + kx - s.padding;
                                            if (ix < 0 || ix >= in.w) continue;
                                            acc += static_cast<double>(x.data[in_base + ix]) *
                                                   static_cast<double>(W.data[w_base + kx]);
                                        }
                                    }
                                }
                                y.at4(im, oc, oy, ox, out.c, out.h, out.w) = static_cast<float>(acc);
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::relu: {
                for (std::size_t j = 0; j < x.data.size(); ++j) y.data[j] = x.data[j] > 0.0f ? x.data[j] : 0.0f;
                break;
            }
            case LayerKind::sigmoid: {
                for (std::size_t j = 0; j < x.data.size(); ++j)
                    y.data[j] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(x.data[j]))));
                break;
            }
            case LayerKind::maxpool: {
                auto& argmax = pool_argmax_[i];
                argmax.assign(y.data.size(), -1);
                const int ps = s.pool_size;
                for (int im = 0; im < n; ++im) {
                    for (int c = 0; c < in.c; ++c) {
                        for (int oy = 0; oy < out.h; ++oy) {
                            for (int ox = 0; ox < out.w; ++ox) {
                                float best = -std::numeric_limits<float>::infinity();
                                int best_idx = -1;
                                for (int py = 0; py < ps; ++py) {
                                    for (int px = 0; px < ps; ++px) {
                                        const int iy = oy * ps + py;
                                        const int ix = ox * ps + px;
                                        const int idx = ((im * in.c + c) * in.h + iy) * in.w + ix;
                                        const float v = x.data[static_cast<std::size_t>(idx)];
                                        if (v > best) {
                                            best = v;
                                            best_idx = idx;
                                        }
                                    }
                                }
                                const int oidx = ((im * out.c + c) * out.h + oy) * out.w + ox;
                                y.data[static_cast<std::size_t>(oidx)] = best;
                                argmax[static_cast<std::size_t>(oidx)] = best_idx;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::flatten: {
                y.data = x.data;
                break;
            }
            case LayerKind::dense: {
                const Tensor& W = weights_[i];
                const Tensor& b = biases_[i];
                const int din = in.c;
                const int dout = out.c;
                for (int im = 0; im < n; ++im) {
                    const std::size_t x_base = static_cast<std::size_t>(im) * din;
                    for (int o = 0; o < dout; ++o) {
                        double acc = b[static_cast<std::size_t>(o)];
                        const std::size_t w_base = static_cast<std::size_t>(o) * din;
                        for (int d = 0; d < din; ++d) {
                            acc += static_cast<double>(x.data[x_base + d]) * static_cast<double>(W.data[w_base + d]);
                        }
                        y.data[static_cast<std::size_t>(im) * dout + o] = static_cast<float>(acc);
                    }
                }
                break;
            }
            case LayerKind::upsample2x: {
                for (int im = 0; im < n; ++im) {
                    for (int c = 0; c < in.c; ++c) {
                        for (int oy = 0; oy < out.h; ++oy) {
                            const int iy = oy / 2;
                            for (int ox = 0; ox < out.w; ++ox) {
                                y.at4(im, c, oy, ox, out.c, out.h, out.w) =
                                    x.at4(im, c, iy, ox / 2, in.c, in.h, in.w);
                            }
                        }
                    }
                }
                break;
            }
        }
        acts_[i + 1] = std::move(y);
    }
    tape_valid_ = true;
    tape_batch_ = n;
    return acts_.back();
}

std::vector<Tensor> LayerStack::backward(const Tensor& output_grad, Tensor* input_grad) {
    if (!tape_valid_) throw StateError("backward called without a recorded forward pass");
    const int n = tape_batch_;
    if (output_grad.numel() != static_cast<std::int64_t>(n) * output_dims().flat()) {
        throw ConfigError("backward: output gradient shape " + output_grad.shape_str() +
                          " does not match last forward output");
    }

    std::vector<Tensor> grads(specs_.size() * 2);  // sparse; compacted at the end
    Tensor up = output_grad;

    for (int li = static_cast<int>(specs_.size()) - 1; li >= 0; --li) {
        const LayerSpec& s = specs_[static_cast<std::size_t>(li)];
        const Dims in = dims_[static_cast<std::size_t>(li)];
        const Dims out = dims_[static_cast<std::size_t>(li) + 1];
        const Tensor& x = acts_[static_cast<std::size_t>(li)];
        const Tensor& y = acts_[static_cast<std::size_t>(li) + 1];
        Tensor down = Tensor::zeros(act_shape(n, in));

        switch (s.kind) {
            case LayerKind::conv2d: {
                const Tensor& W = weights_[static_cast<std::size_t>(li)];
                std::vector<double> dw(W.data.size(), 0.0);
                std::vector<double> db(static_cast<std::size_t>(out.c), 0.0);
                std::vector<double> dx(x.data.size(), 0.0);
                for (int im = 0; im < n; ++im) {
                    for (int oc = 0; oc < out.c; ++oc) {
                        for (int oy = 0; oy < out.h; ++oy) {
                            for (int ox = 0; ox < out.w; ++ox) {
                                const double g = up.at4(im, oc, oy, ox, out.c, out.h, out.w);
                                if (g == 0.0) continue;
                                db[static_cast<std::size_t>(oc)] += g;
                                for (int ic = 0; ic < in.c; ++ic) {
                                    for (int ky = 0; ky < s.kernel_h; ++ky) {
                                        const int iy = oy * s.stride + ky - s.padding;
                                        if (iy < 0 || iy >= in.h) continue;
                                        const std::size_t in_base =
                                            static_cast<std::size_t>(((im * in.c + ic) * in.h + iy) * in.w);
                                        const std::size_t w_base = static_cast<std::size_t>(
                                            ((oc * in.c + ic) * s.kernel_h + ky) * s.kernel_w);
                                        for (int kx = 0; kx < s.kernel_w; ++kx) {
                                            const int ix = ox * s.stride + kx - s.padding;
                                            if (ix < 0 || ix >= in.w) continue;
                                            dw[w_base + kx] += g * static_cast<double>(x.data[in_base + ix]);
                                            dx[in_base + ix] += g * static_cast<double>(W.data[w_base + kx]);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                Tensor gw = Tensor::zeros(W.shape);
                for (std::size_t j = 0; j < dw.size(); ++j) gw.data[j] = static_cast<float>(dw[j]);
                Tensor gb = Tensor::zeros({out.c});
                for (std::size_t j = 0; j < db.size(); ++j) gb.data[j] = static_cast<float>(db[j]);
                grads[static_cast<std::size_t>(li) * 2] = std::move(gw);
                grads[static_cast<std::size_t>(li) * 2 + 1] = std::move(gb);
                for (std::size_t j = 0; j < dx.size(); ++j) down.data[j] = static_cast<float>(dx[j]);
                break;
            }
            case LayerKind::relu: {
                for (std::size_t j = 0; j < up.data.size(); ++j)
                    down.data[j] = y.data[j] > 0.0f ? up.data[j] : 0.0f;
                break;
            }
            case LayerKind::sigmoid: {
                for (std::size_t j = 0; j < up.data.size(); ++j) {
                    const double yv = y.data[j];
                    down.data[j] = static_cast<float>(static_cast<double>(up.data[j]) * yv * (1.0 - yv));
                }
                break;
            }
            case LayerKind::maxpool: {
                const auto& argmax = pool_argmax_[static_cast<std::size_t>(li)];
                for (std::size_t j = 0; j < up.data.size(); ++j) {
                    down.data[static_cast<std::size_t>(argmax[j])] += up.data[j];
                }
                break;
            }
            case LayerKind::flatten: {
                down.data = up.data;
                break;
            }
            case LayerKind::dense: {
                const Tensor& W = weights_[static_cast<std::size_t>(li)];
                const int din = in.c;
                const int dout = out.c;
                std::vector<double> dw(W.data.size(), 0.0);
                std::vector<double> db(static_cast<std::size_t>(dout), 0.0);
                std::vector<double> dx(x.data.size(), 0.0);
                for (int im = 0; im < n; ++im) {
                    const std::size_t x_base = static_cast<std::size_t>(im) * din;
                    const std::size_t g_base = static_cast<std::size_t>(im) * dout;
                    for (int o = 0; o < dout; ++o) {
                        const double g = up.data[g_base + o];
                        if (g == 0.0) continue;
                        db[static_cast<std::size_t>(o)] += g;
                        const std::size_t w_base = static_cast<std::size_t>(o) * din;
                        for (int d = 0; d < din; ++d) {
                            dw[w_base + d] += g * static_cast<double>(x.data[x_base + d]);
                            dx[x_base + d] += g * static_cast<double>(W.data[w_base + d]);
                        }
                    }
                }
                Tensor gw = Tensor::zeros(W.shape);
                for (std::size_t j = 0; j < dw.size(); ++j) gw.data[j] = static_cast<float>(dw[j]);
                Tensor gb = Tensor::zeros({dout});
                for (std::size_t j = 0; j < db.size(); ++j) gb.data[j] = static_cast<float>(db[j]);
                grads[static_cast<std::size_t>(li) * 2] = std::move(gw);
                grads[static_cast<std::size_t>(li) * 2 + 1] = std::move(gb);
                for (std::size_t j = 0; j < dx.size(); ++j) down.data[j] = static_cast<float>(dx[j]);
                break;
            }
            case LayerKind::upsample2x: {
                for (int im = 0; im < n; ++im) {
                    for (int c = 0; c < in.c; ++c) {
                        for (int iy = 0; iy < in.h; ++iy) {
                            for (int ix = 0; ix < in.w; ++ix) {
                                double acc = 0.0;
                                for (int py = 0; py < 2; ++py)
                                    for (int px = 0; px < 2; ++px)
                                        acc += up.at4(im, c, iy * 2 + py, ix * 2 + px, out.c, out.h, out.w);
                                down.at4(im, c, iy, ix, in.c, in.h, in.w) = static_cast<float>(acc);
                            }
                        }
                    }
                }
                break;
            }
        }
        up = std::move(down);
    }

    if (input_grad) *input_grad = std::move(up);

    std::vector<Tensor> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (weights_[i].numel() > 0) {
            out.push_back(std::move(grads[i * 2]));
            out.push_back(std::move(grads[i * 2 + 1]));
        }
    }
    return out;
}

void LayerStack::drop_tape() {
    tape_valid_ = false;
    acts_.clear();
    pool_argmax_.clear();
}

const Tensor& LayerStack::activation_after(int index) const {
    if (!tape_valid_) throw StateError("activation_after called without a recorded forward pass");
    return acts_[static_cast<std::size_t>(index + 1)];
}

NetworkModel::NetworkModel(std::vector<LayerSpec> backbone_specs, Dims input, int class_count,
                           std::uint64_t seed) {
    if (class_count < 1) throw ConfigError("class count must be >= 1");
    backbone = LayerStack(std::move(backbone_specs), input, derive_seed(seed, "backbone-init"));
    const Dims feat = backbone.output_dims();
    if (feat.h != 1 || feat.w != 1) {
        throw ConfigError("backbone must end flat (add flatten/dense); got feature dims " +
                          std::to_string(feat.c) + "x" + std::to_string(feat.h) + "x" + std::to_string(feat.w));
    }
    head = LayerStack({LayerSpec::dense(class_count)}, feat, derive_seed(seed, "head-init"));
}

Tensor NetworkModel::forward(const Tensor& batch) { return head.forward(backbone.forward(batch)); }

std::vector<Tensor> NetworkModel::backward(const Tensor& logit_grad) {
    Tensor feat_grad;
    std::vector<Tensor> head_grads = head.backward(logit_grad, &feat_grad);
    std::vector<Tensor> grads = backbone.backward(feat_grad);
    for (auto& g : head_grads) grads.push_back(std::move(g));
    return grads;
}

std::vector<Tensor*> NetworkModel::parameters() {
    auto out = backbone.parameters();
    for (auto* p : head.parameters()) out.push_back(p);
    return out;
}

std::vector<const Tensor*> NetworkModel::parameters() const {
    auto out = backbone.parameters();
    for (const auto* p : head.parameters()) out.push_back(p);
    return out;
}

std::vector<std::string> NetworkModel::parameter_names() const {
    auto out = backbone.parameter_names("backbone");
    for (auto& nm : head.parameter_names("head")) out.push_back(std::move(nm));
    return out;
}

void reinit_head(NetworkModel& model, int new_class_count, std::uint64_t seed) {
    if (new_class_count < 1) throw InputError("reinit_head: class count must be >= 1");
    model.head = LayerStack({LayerSpec::dense(new_class_count)}, model.backbone.output_dims(), seed);
}

double cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    return cross_entropy_with_grad(logits, labels).value;
}

LossGrad cross_entropy_with_grad(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.shape.size() != 2) throw InputError("cross_entropy: logits must be [n, classes]");
    const int n = logits.shape[0];
    const int classes = logits.shape[1];
    if (static_cast<int>(labels.size()) != n) throw InputError("cross_entropy: label count != batch size");
    LossGrad res;
    res.grad = Tensor::zeros(logits.shape);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int label = labels[static_cast<std::size_t>(i)];
        if (label < 0 || label >= classes) {
            throw InputError("cross_entropy: label " + std::to_string(label) + " out of range [0," +
                             std::to_string(classes) + ")");
        }
        const std::size_t base = static_cast<std::size_t>(i) * classes;
        double mx = logits.data[base];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(logits.data[base + c]));
        double sum = 0.0;
        for (int c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(logits.data[base + c]) - mx);
        const double lse = mx + std::log(sum);
        total += lse - static_cast<double>(logits.data[base + label]);
        for (int c = 0; c < classes; ++c) {
            const double p = std::exp(static_cast<double>(logits.data[base + c]) - mx) / sum;
            const double onehot = (c == label) ? 1.0 : 0.0;
            res.grad.data[base + c] = static_cast<float>((p - onehot) / n);
        }
    }
    res.value = total / n;
    if (!std::isfinite(res.value)) throw NumericalError("cross_entropy produced a non-finite loss");
    return res;
}

double mse_loss(const Tensor& output, const Tensor& target) {
    if (!output.same_shape(target)) {
        throw InputError("mse_loss: shape mismatch " + output.shape_str() + " vs " + target.shape_str());
    }
    double total = 0.0;
    for (std::size_t j = 0; j < output.data.size(); ++j) {
        const double d = static_cast<double>(output.data[j]) - static_cast<double>(target.data[j]);
        total += d * d;
    }
    return total / static_cast<double>(output.data.size());
}

LossGrad mse_with_grad(const Tensor& output, const Tensor& target) {
    LossGrad res;
    res.value = mse_loss(output, target);
    res.grad = Tensor::zeros(output.shape);
    const double scale = 2.0 / static_cast<double>(output.data.size());
    for (std::size_t j = 0; j < output.data.size(); ++j) {
        res.grad.data[j] =
            static_cast<float>(scale * (static_cast<double>(output.data[j]) - static_cast<double>(target.data[j])));
    }
    return res;
}

}  // namespace curvete
