#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slstt {

/// Dense image, row-major, channels interleaved (HWC). Pixel intensities
/// follow the 8-bit file convention (0..255) for frame data; model input
/// images built from flow fields use their own documented ranges.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c);

    double& at(int x, int y, int c);
    double at(int x, int y, int c) const;
    std::size_t size() const { return data.size(); }
};

/// ITU-R BT.601 luma conversion for 3-channel input; identity for 1-channel.
Image to_grayscale(const Image& img);

/// Bilinear sample with border clamp, single channel selected.
double sample_bilinear(const Image& img, double x, double y, int channel);

/// Bilinear resize to (w, h), all channels.
Image resize_bilinear(const Image& img, int w, int h);

// NetPBM IO. Grayscale images load from P2/P5, color from P3/P6; writers
// emit binary P5/P6 with maxval 255. Values are clamped and rounded.
Image read_pnm(const std::string& path);
void write_pgm(const std::string& path, const Image& img);
void write_ppm(const std::string& path, const Image& img);

}  // namespace slstt
