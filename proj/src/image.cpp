#include "curvete/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "curvete/errors.hpp"

namespace curvete {

void ImageSample::validate() const {
    if (height < 8 || width < 8) {
        throw InputError("image " + id + ": dimensions must be at least 8x8, got " + std::to_string(height) +
                         "x" + std::to_string(width));
    }
    if (pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw InputError("image " + id + ": pixel buffer does not match dimensions");
    }
}

namespace {

// Reads one header token, skipping whitespace and '#' comments; tracks offset.
std::string read_pgm_token(const std::string& buf, std::size_t& pos, const std::string& path) {
    while (pos < buf.size()) {
        const char c = buf[pos];
        if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= buf.size()) {
        throw ParseError(path + ": truncated PGM header at byte " + std::to_string(pos));
    }
    const std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    return buf.substr(start, pos - start);
}

int parse_pgm_int(const std::string& tok, std::size_t pos, const std::string& path, const char* what) {
    for (const char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseError(path + ": invalid " + what + " '" + tok + "' at byte " + std::to_string(pos));
        }
    }
    return std::atoi(tok.c_str());
}

}  // namespace

ImageSample load_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError(path + ": cannot open file");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    const std::string magic = read_pgm_token(buf, pos, path);
    if (magic != "P5") {
        throw ParseError(path + ": unsupported format '" + magic + "' at byte 0 (binary P5 required)");
    }
    const std::size_t wpos = pos;
    const int w = parse_pgm_int(read_pgm_token(buf, pos, path), wpos, path, "width");
    const std::size_t hpos = pos;
    const int h = parse_pgm_int(read_pgm_token(buf, pos, path), hpos, path, "height");
    const std::size_t mpos = pos;
    const int maxval = parse_pgm_int(read_pgm_token(buf, pos, path), mpos, path, "maxval");
    if (maxval != 255) {
        throw ParseError(path + ": unsupported maxval " + std::to_string(maxval) + " at byte " +
                         std::to_string(mpos) + " (only 255)");
    }
    if (w < 1 || h < 1) throw ParseError(path + ": non-positive dimensions");
    // exactly one whitespace byte separates the header from the payload
    if (pos >= buf.size()) throw ParseError(path + ": truncated after header at byte " + std::to_string(pos));
    ++pos;

    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (buf.size() - pos < need) {
        throw ParseError(path + ": truncated payload at byte " + std::to_string(buf.size()) + " (need " +
                         std::to_string(pos + need) + " bytes)");
    }
    ImageSample s;
    s.id = path;
    s.width = w;
    s.height = h;
    s.pixels.resize(need);
    std::copy_n(reinterpret_cast<const std::uint8_t*>(buf.data()) + pos, need, s.pixels.begin());
    return s;
}

void save_pgm(const ImageSample& sample, const std::string& path) {
    if (sample.pixels.size() != static_cast<std::size_t>(sample.height) * sample.width) {
        throw InputError("save_pgm: pixel buffer does not match dimensions");
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("save_pgm: cannot open " + path + " for writing");
    f << "P5\n" << sample.width << " " << sample.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(sample.pixels.data()),
            static_cast<std::streamsize>(sample.pixels.size()));
    if (!f) throw InputError("save_pgm: write failed for " + path);
}

ImageSample histogram_equalize(const ImageSample& sample) {
    const std::size_t n = sample.pixels.size();
    std::array<std::size_t, 256> hist{};
    for (const auto p : sample.pixels) ++hist[p];

    std::array<std::size_t, 256> cdf{};
    std::size_t running = 0;
    std::size_t cdf_min = 0;
    for (int v = 0; v < 256; ++v) {
        running += hist[static_cast<std::size_t>(v)];
        cdf[static_cast<std::size_t>(v)] = running;
        if (cdf_min == 0 && running > 0) cdf_min = running;
    }
    if (n == cdf_min) return sample;  // constant image

    ImageSample out = sample;
    std::array<std::uint8_t, 256> lut{};
    const double denom = static_cast<double>(n - cdf_min);
    for (int v = 0; v < 256; ++v) {
        const double num = static_cast<double>(cdf[static_cast<std::size_t>(v)]) - static_cast<double>(cdf_min);
        const long mapped = std::lround(num / denom * 255.0);
        lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(std::clamp(mapped, 0L, 255L));
    }
    for (auto& p : out.pixels) p = lut[p];
    return out;
}

AugmentationOp AugmentationOp::rotate(double degrees) {
    AugmentationOp op;
    op.kind = Kind::rotate;
    op.degrees = degrees;
    return op;
}
AugmentationOp AugmentationOp::reflect(Axis axis) {
    AugmentationOp op;
    op.kind = Kind::reflect;
    op.axis = axis;
    return op;
}
AugmentationOp AugmentationOp::shift(int dx, int dy) {
    AugmentationOp op;
    op.kind = Kind::shift;
    op.dx = dx;
    op.dy = dy;
    return op;
}
AugmentationOp AugmentationOp::sharpen() {
    AugmentationOp op;
    op.kind = Kind::sharpen;
    return op;
}
AugmentationOp AugmentationOp::crop(int x, int y, int w, int h) {
    AugmentationOp op;
    op.kind = Kind::crop;
    op.crop_x = x;
    op.crop_y = y;
    op.crop_w = w;
    op.crop_h = h;
    return op;
}
AugmentationOp AugmentationOp::zoom(double factor) {
    AugmentationOp op;
    op.kind = Kind::zoom;
    op.zoom_factor = factor;
    return op;
}

namespace {

ImageSample rotate_quarter(const ImageSample& in, int quarters) {
    // exact index permutations for multiples of 90 degrees
    ImageSample out = in;
    if (quarters == 0) return out;
    const int h = in.height, w = in.width;
    if (quarters == 2) {
        out.pixels.assign(in.pixels.rbegin(), in.pixels.rend());
        return out;
    }
    out.height = w;
    out.width = h;
    out.pixels.assign(in.pixels.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (quarters == 1) {
                out.at(w - 1 - x, y) = in.at(y, x);  // 90 deg counterclockwise
            } else {
                out.at(x, h - 1 - y) = in.at(y, x);  // 270 deg ccw (= -90)
            }
        }
    }
    return out;
}

ImageSample rotate_arbitrary(const ImageSample& in, double degrees) {
    // nearest-neighbor inverse mapping around the image center, zero fill
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    const double cy = (in.height - 1) / 2.0, cx = (in.width - 1) / 2.0;
    ImageSample out = in;
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            const double ry = y - cy, rx = x - cx;
            const double sy = cy + (sn * rx + cs * ry);
            const double sx = cx + (cs * rx - sn * ry);
            const long iy = std::lround(sy), ix = std::lround(sx);
            out.at(y, x) = (iy >= 0 && iy < in.height && ix >= 0 && ix < in.width)
                               ? in.at(static_cast<int>(iy), static_cast<int>(ix))
                               : 0;
        }
    }
    return out;
}

}  // namespace

ImageSample augment(const ImageSample& sample, const AugmentationOp& op, std::uint64_t /*seed*/) {
    switch (op.kind) {
        case AugmentationOp::Kind::rotate: {
            if (op.degrees < -180.0 || op.degrees > 180.0) {
                throw InputError("rotate: degrees must lie in (-180, 180]");
            }
            const double d = (op.degrees == -180.0) ? 180.0 : op.degrees;  // same rotation
            if (d == 0.0) return sample;
            if (d == 180.0) return rotate_quarter(sample, 2);
            // quarter turns are exact index permutations, but only a square
            // frame keeps its dimensions under them
            if (sample.height == sample.width) {
                if (d == 90.0) return rotate_quarter(sample, 1);
                if (d == -90.0) return rotate_quarter(sample, 3);
            }
            return rotate_arbitrary(sample, d);
        }
        case AugmentationOp::Kind::reflect: {
            ImageSample out = sample;
            if (op.axis == AugmentationOp::Axis::horizontal) {
                for (int y = 0; y < sample.height; ++y)
                    for (int x = 0; x < sample.width; ++x) out.at(y, x) = sample.at(y, sample.width - 1 - x);
            } else {
                for (int y = 0; y < sample.height; ++y)
                    for (int x = 0; x < sample.width; ++x) out.at(y, x) = sample.at(sample.height - 1 - y, x);
            }
            return out;
        }
        case AugmentationOp::Kind::shift: {
            ImageSample out = sample;
            for (int y = 0; y < sample.height; ++y) {
                for (int x = 0; x < sample.width; ++x) {
                    const int sy = y - op.dy, sx = x - op.dx;
                    out.at(y, x) = (sy >= 0 && sy < sample.height && sx >= 0 && sx < sample.width)
                                       ? sample.at(sy, sx)
                                       : 0;
                }
            }
            return out;
        }
        case AugmentationOp::Kind::sharpen: {
            // identity + Laplacian: [[0,-1,0],[-1,5,-1],[0,-1,0]], replicated edges
            ImageSample out = sample;
            const auto px = [&](int y, int x) {
                y = std::clamp(y, 0, sample.height - 1);
                x = std::clamp(x, 0, sample.width - 1);
                return static_cast<int>(sample.at(y, x));
            };
            for (int y = 0; y < sample.height; ++y) {
                for (int x = 0; x < sample.width; ++x) {
                    const int v = 5 * px(y, x) - px(y - 1, x) - px(y + 1, x) - px(y, x - 1) - px(y, x + 1);
                    out.at(y, x) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
                }
            }
            return out;
        }
        case AugmentationOp::Kind::crop: {
            if (op.crop_w < 1 || op.crop_h < 1 || op.crop_x < 0 || op.crop_y < 0 ||
                op.crop_x + op.crop_w > sample.width || op.crop_y + op.crop_h > sample.height) {
                throw InputError("crop: box outside image bounds");
            }
            ImageSample out = sample;
            out.width = op.crop_w;
            out.height = op.crop_h;
            out.pixels.assign(static_cast<std::size_t>(op.crop_w) * op.crop_h, 0);
            for (int y = 0; y < op.crop_h; ++y)
                for (int x = 0; x < op.crop_w; ++x) out.at(y, x) = sample.at(op.crop_y + y, op.crop_x + x);
            return out;
        }
        case AugmentationOp::Kind::zoom: {
            if (op.zoom_factor <= 0.0) throw InputError("zoom: factor must be > 0");
            const int nh = std::max(1, static_cast<int>(std::lround(sample.height * op.zoom_factor)));
            const int nw = std::max(1, static_cast<int>(std::lround(sample.width * op.zoom_factor)));
            return resize_nearest(sample, nh, nw);
        }
    }
    throw InputError("augment: unknown op kind");
}

ImageSample resize_nearest(const ImageSample& sample, int new_h, int new_w) {
    if (new_h < 1 || new_w < 1) throw InputError("resize: target dimensions must be positive");
    ImageSample out = sample;
    out.height = new_h;
    out.width = new_w;
    out.pixels.assign(static_cast<std::size_t>(new_h) * new_w, 0);
    for (int y = 0; y < new_h; ++y) {
        const int sy = std::min(sample.height - 1,
                                static_cast<int>(static_cast<std::int64_t>(y) * sample.height / new_h));
        for (int x = 0; x < new_w; ++x) {
            const int sx = std::min(sample.width - 1,
                                    static_cast<int>(static_cast<std::int64_t>(x) * sample.width / new_w));
            out.at(y, x) = sample.at(sy, sx);
        }
    }
    return out;
}

}  // namespace curvete
