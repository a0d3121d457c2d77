#include "slstt/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "slstt/error.hpp"

namespace slstt {

FlowField::FlowField(int w, int h) : width(w), height(h) {
    require(w > 0 && h > 0, "flow field dimensions must be positive");
    u.assign(static_cast<size_t>(w) * h, 0.0);
    v.assign(static_cast<size_t>(w) * h, 0.0);
}

double FlowField::magnitude(int x, int y) const {
    const size_t i = static_cast<size_t>(y) * width + x;
    return std::sqrt(u[i] * u[i] + v[i] * v[i]);
}

double FlowField::mean_magnitude(int border) const {
    require(2 * border < width && 2 * border < height, "border swallows the whole field");
    double total = 0.0;
    int count = 0;
    for (int y = border; y < height - border; ++y)
        for (int x = border; x < width - border; ++x) {
            total += magnitude(x, y);
            ++count;
        }
    return total / count;
}

std::pair<double, double> FlowField::mean_vector(int border) const {
    require(2 * border < width && 2 * border < height, "border swallows the whole field");
    double su = 0.0, sv = 0.0;
    int count = 0;
    for (int y = border; y < height - border; ++y)
        for (int x = border; x < width - border; ++x) {
            const size_t i = static_cast<size_t>(y) * width + x;
            su += u[i];
            sv += v[i];
            ++count;
        }
    return {su / count, sv / count};
}

// ---------------------------------------------------------------------------
// Horn-Schunck
// ---------------------------------------------------------------------------

namespace {

// 3x3 binomial smoothing; light denoise before differentiation.
Image smooth3(const Image& img) {
    static const double k[3] = {0.25, 0.5, 0.25};
    Image tmp(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = std::clamp(x + dx, 0, img.width - 1);
                acc += k[dx + 1] * img.data[static_cast<size_t>(y) * img.width + xx];
            }
            tmp.data[static_cast<size_t>(y) * img.width + x] = acc;
        }
    Image out = tmp;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, img.height - 1);
                acc += k[dy + 1] * tmp.data[static_cast<size_t>(yy) * img.width + x];
            }
            out.data[static_cast<size_t>(y) * img.width + x] = acc;
        }
    return out;
}

double at(const Image& img, int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.data[static_cast<size_t>(y) * img.width + x];
}

// Classic Horn-Schunck neighbor average (edge weight 1/6, corner 1/12).
double neighbor_avg(const std::vector<double>& f, int w, int h, int x, int y) {
    auto g = [&](int xx, int yy) {
        xx = std::clamp(xx, 0, w - 1);
        yy = std::clamp(yy, 0, h - 1);
        return f[static_cast<size_t>(yy) * w + xx];
    };
    return (g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1)) / 6.0 +
           (g(x - 1, y - 1) + g(x + 1, y - 1) + g(x - 1, y + 1) + g(x + 1, y + 1)) / 12.0;
}

// Relaxation on the flow increment for one pyramid level. `ref` and
// `warped` are the reference image and the target pre-warped by the current
// flow estimate, so the increment starts from zero.
void relax_level(const Image& ref, const Image& warped, const FlowParams& params,
                 std::vector<double>& du, std::vector<double>& dv) {
    const int w = ref.width, h = ref.height;
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> ix(n), iy(n), it(n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            ix[i] = 0.25 * (at(ref, x + 1, y) - at(ref, x - 1, y) +
                            at(warped, x + 1, y) - at(warped, x - 1, y));
            iy[i] = 0.25 * (at(ref, x, y + 1) - at(ref, x, y - 1) +
                            at(warped, x, y + 1) - at(warped, x, y - 1));
            it[i] = at(warped, x, y) - at(ref, x, y);
        }
    du.assign(n, 0.0);
    dv.assign(n, 0.0);
    std::vector<double> nu(n), nv(n);
    for (int iter = 0; iter < params.iterations; ++iter) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                const double au = neighbor_avg(du, w, h, x, y);
                const double av = neighbor_avg(dv, w, h, x, y);
                const double t = (ix[i] * au + iy[i] * av + it[i]) /
                                 (params.smoothness_weight + ix[i] * ix[i] + iy[i] * iy[i]);
                nu[i] = au - ix[i] * t;
                nv[i] = av - iy[i] * t;
            }
        du.swap(nu);
        dv.swap(nv);
    }
}

Image warp_by_flow(const Image& img, const std::vector<double>& u, const std::vector<double>& v) {
    Image out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const size_t i = static_cast<size_t>(y) * img.width + x;
            out.data[i] = sample_bilinear(img, x + u[i], y + v[i], 0);
        }
    return out;
}

}  // namespace

FlowField estimate_flow(const Image& reference, const Image& target, const FlowParams& params) {
    require(reference.width == target.width && reference.height == target.height,
            "flow frames must share dimensions");
    require(params.iterations > 0, "flow iteration count must be positive");
    require(params.pyramid_levels > 0, "pyramid must have at least one level");

    const Image ref0 = to_grayscale(reference);
    const Image tgt0 = to_grayscale(target);
    {
        const int shrink = 1 << (params.pyramid_levels - 1);
        const int coarse_w = std::max(1, ref0.width / shrink);
        const int coarse_h = std::max(1, ref0.height / shrink);
        require(coarse_w >= 8 && coarse_h >= 8,
                "image too small for the requested pyramid depth");
    }

    // Level 0 is full resolution; each further level halves the size.
    std::vector<Image> refs, tgts;
    refs.push_back(smooth3(ref0));
    tgts.push_back(smooth3(tgt0));
    for (int l = 1; l < params.pyramid_levels; ++l) {
        const Image& prev = refs.back();
        const int w = (prev.width + 1) / 2, h = (prev.height + 1) / 2;
        refs.push_back(smooth3(resize_bilinear(refs.back(), w, h)));
        tgts.push_back(smooth3(resize_bilinear(tgts.back(), w, h)));
    }

    std::vector<double> u, v;
    for (int l = params.pyramid_levels - 1; l >= 0; --l) {
        const Image& ref = refs[l];
        const Image& tgt = tgts[l];
        const size_t n = static_cast<size_t>(ref.width) * ref.height;
        if (l == params.pyramid_levels - 1) {
            u.assign(n, 0.0);
            v.assign(n, 0.0);
        } else {
            // Upsample the coarser estimate and rescale displacements.
            const Image& coarse = refs[l + 1];
            Image uf(coarse.width, coarse.height, 1);
            Image vf(coarse.width, coarse.height, 1);
            uf.data = u;
            vf.data = v;
            const double sx = static_cast<double>(ref.width) / coarse.width;
            const double sy = static_cast<double>(ref.height) / coarse.height;
            Image uu = resize_bilinear(uf, ref.width, ref.height);
            Image vv = resize_bilinear(vf, ref.width, ref.height);
            u.assign(n, 0.0);
            v.assign(n, 0.0);
            for (size_t i = 0; i < n; ++i) {
                u[i] = uu.data[i] * sx;
                v[i] = vv.data[i] * sy;
            }
        }
        const Image warped = warp_by_flow(tgt, u, v);
        std::vector<double> du, dv;
        relax_level(ref, warped, params, du, dv);
        for (size_t i = 0; i < n; ++i) {
            u[i] += du[i];
            v[i] += dv[i];
        }
    }

    FlowField field(ref0.width, ref0.height);
    field.u = std::move(u);
    field.v = std::move(v);
    return field;
}

std::vector<FlowField> long_term_flow(const std::vector<Image>& frames, int onset_index,
                                      const FlowParams& params) {
    require(!frames.empty(), "long-term flow needs at least one frame");
    require(onset_index >= 0 && onset_index < static_cast<int>(frames.size()),
            "onset index out of range");
    std::vector<FlowField> fields;
    fields.reserve(frames.size());
    for (size_t t = 0; t < frames.size(); ++t) {
        if (static_cast<int>(t) == onset_index) {
            fields.emplace_back(frames[t].width, frames[t].height);  // exactly zero
        } else {
            fields.push_back(estimate_flow(frames[onset_index], frames[t], params));
        }
    }
    return fields;
}

// ---------------------------------------------------------------------------
// Colorization
// ---------------------------------------------------------------------------

Image colorize_flow(const FlowField& field, double max_magnitude) {
    require(field.width > 0 && field.height > 0, "cannot colorize an empty field");
    require(max_magnitude >= 0.0, "max_magnitude must be non-negative");
    Image out(field.width, field.height, 3);
    const double pi = 3.14159265358979323846;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) {
            const size_t i = static_cast<size_t>(y) * field.width + x;
            const double mag = std::sqrt(field.u[i] * field.u[i] + field.v[i] * field.v[i]);
            double sat = 0.0;
            double hue = 0.0;
            if (mag > 0.0 && max_magnitude > 0.0) {
                sat = std::min(mag / max_magnitude, 1.0);
                double angle = std::atan2(field.v[i], field.u[i]);  // [-pi, pi]
                if (angle < 0.0) angle += 2.0 * pi;
                hue = angle * 180.0 / pi;  // degrees in [0, 360)
            }
            // HSV -> RGB with value fixed at 1; zero saturation gives white.
            const double c = sat;
            const double hp = hue / 60.0;
            const double xx = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
            double r = 0, g = 0, b = 0;
            switch (static_cast<int>(hp) % 6) {
                case 0: r = c; g = xx; break;
                case 1: r = xx; g = c; break;
                case 2: g = c; b = xx; break;
                case 3: g = xx; b = c; break;
                case 4: r = xx; b = c; break;
                default: r = c; b = xx; break;
            }
            const double m = 1.0 - c;
            const size_t o = i * 3;
            out.data[o + 0] = (r + m) * 255.0;
            out.data[o + 1] = (g + m) * 255.0;
            out.data[o + 2] = (b + m) * 255.0;
        }
    return out;
}

Image colorize_flow_auto(const FlowField& field) {
    double peak = 0.0;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) peak = std::max(peak, field.magnitude(x, y));
    return colorize_flow(field, peak);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    require(static_cast<bool>(is), "truncated flow file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

float get_f32(std::istream& is) {
    const uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void save_flow(const std::string& path, const FlowField& field) {
    require(field.width > 0 && field.height > 0, "cannot save an empty flow field");
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "cannot open for writing: " + path);
    os.write("SLFL", 4);
    put_u32(os, static_cast<uint32_t>(field.width));
    put_u32(os, static_cast<uint32_t>(field.height));
    const size_t n = static_cast<size_t>(field.width) * field.height;
    for (size_t i = 0; i < n; ++i) {
        put_f32(os, static_cast<float>(field.u[i]));
        put_f32(os, static_cast<float>(field.v[i]));
    }
    require(static_cast<bool>(os), "write failed: " + path);
}

FlowField load_flow(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    require(static_cast<bool>(is) && std::memcmp(magic, "SLFL", 4) == 0,
            "not a flow file: " + path);
    const uint32_t w = get_u32(is);
    const uint32_t h = get_u32(is);
    require(w > 0 && h > 0 && w < (1u << 20) && h < (1u << 20),
            "implausible flow dimensions in " + path);
    FlowField field(static_cast<int>(w), static_cast<int>(h));
    const size_t n = static_cast<size_t>(w) * h;
    for (size_t i = 0; i < n; ++i) {
        field.u[i] = get_f32(is);
        field.v[i] = get_f32(is);
    }
    is.peek();
    require(is.eof(), "trailing bytes in flow file: " + path);
    return field;
}

}  // namespace slstt
