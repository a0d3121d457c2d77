#include "slstt/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slstt/error.hpp"

namespace slstt {

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
    require(w > 0 && h > 0 && c > 0, "image: invalid dimensions");
    data.assign(static_cast<std::size_t>(w) * h * c, 0.0);
}

double& Image::at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
}

double Image::at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) {
        return img;
    }
    require(img.channels == 3, "to_grayscale: expected 1 or 3 channels, got " +
                                   std::to_string(img.channels));
    Image out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(x, y, 0) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                              0.114 * img.at(x, y, 2);
        }
    }
    return out;
}

double sample_bilinear(const Image& img, double x, double y, int channel) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;
    const double top = img.at(x0, y0, channel) * (1.0 - fx) + img.at(x1, y0, channel) * fx;
    const double bot = img.at(x0, y1, channel) * (1.0 - fx) + img.at(x1, y1, channel) * fx;
    return top * (1.0 - fy) + bot * fy;
}

Image resize_bilinear(const Image& img, int w, int h) {
    require(w > 0 && h > 0, "resize: invalid target size");
    if (w == img.width && h == img.height) {
        return img;
    }
    Image out(w, h, img.channels);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double srcx = (x + 0.5) * sx - 0.5;
            const double srcy = (y + 0.5) * sy - 0.5;
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = sample_bilinear(img, srcx, srcy, c);
            }
        }
    }
    return out;
}

namespace {

int next_pnm_token(std::istream& in, std::string& tok) {
    tok.clear();
    int ch = in.get();
    for (;;) {
        while (ch != EOF && std::isspace(ch)) {
            ch = in.get();
        }
        if (ch == '#') {
            while (ch != EOF && ch != '\n') {
                ch = in.get();
            }
            continue;
        }
        break;
    }
    while (ch != EOF && !std::isspace(ch)) {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    return ch;
}

int parse_int_token(std::istream& in, const std::string& path) {
    std::string tok;
    next_pnm_token(in, tok);
    require(!tok.empty(), "pnm: truncated header in " + path);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        fail("pnm: bad header token '" + tok + "' in " + path);
    }
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "pnm: cannot open " + path);
    std::string magic;
    next_pnm_token(in, magic);
    require(magic == "P2" || magic == "P5" || magic == "P3" || magic == "P6",
            "pnm: unsupported format '" + magic + "' in " + path);
    const bool binary = (magic == "P5" || magic == "P6");
    const int channels = (magic == "P3" || magic == "P6") ? 3 : 1;
    const int w = parse_int_token(in, path);
    const int h = parse_int_token(in, path);
    const int maxval = parse_int_token(in, path);
    require(w > 0 && h > 0, "pnm: bad dimensions in " + path);
    require(maxval > 0 && maxval <= 255, "pnm: only 8-bit files supported, " + path);

    Image img(w, h, channels);
    const std::size_t count = img.size();
    if (binary) {
        std::vector<std::uint8_t> raw(count);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
        require(static_cast<std::size_t>(in.gcount()) == count, "pnm: truncated data in " + path);
        for (std::size_t i = 0; i < count; ++i) {
            img.data[i] = raw[i];
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            img.data[i] = parse_int_token(in, path);
        }
    }
    return img;
}

void write_pgm(const std::string& path, const Image& img) {
    require(img.channels == 1, "write_pgm: expected 1 channel");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "pgm: cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        raw[i] = quantize(img.data[i]);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), "pgm: write failed for " + path);
}

void write_ppm(const std::string& path, const Image& img) {
    require(img.channels == 3, "write_ppm: expected 3 channels");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "ppm: cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<std::uint8_t> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        raw[i] = quantize(img.data[i]);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(out.good(), "ppm: write failed for " + path);
}

}  // namespace slstt
