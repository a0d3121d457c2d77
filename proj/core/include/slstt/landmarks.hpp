#pragma once

#include <string>
#include <vector>

#include "slstt/image.hpp"

namespace slstt {

/// 68-point facial landmark annotation, pixel coordinates.
struct LandmarkSet {
    static constexpr int kCount = 68;
    std::vector<double> x;  // kCount entries
    std::vector<double> y;

    void validate() const;  // throws unless exactly 68 finite points
};

/// Square crop centered on the nose tip (point 30). The side length is
///   s = (y[8] - y[19]) + (y[8] - y[57])
/// i.e. chin-to-brow plus chin-to-lip vertical extents.
struct CropSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double side = 0.0;
};

/// Rotation by theta about the origin followed by translation.
struct RigidTransform {
    double theta = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    std::pair<double, double> apply(double x, double y) const;
    std::pair<double, double> apply_inverse(double x, double y) const;
};

/// Plain text, one "x y" pair per line, 68 lines.
LandmarkSet load_landmarks(const std::string& path);
void save_landmarks(const std::string& path, const LandmarkSet& set);

CropSpec crop_square(const LandmarkSet& apex_landmarks);

/// Least-squares rigid fit (rotation + translation, no scale, no
/// reflection) taking `frame` points onto `reference` points.
RigidTransform align_rigid(const LandmarkSet& frame, const LandmarkSet& reference);

/// Sum of squared distances between transformed frame points and the
/// reference points.
double rigid_residual(const LandmarkSet& frame, const LandmarkSet& reference,
                      const RigidTransform& transform);

/// Resample `img` so that output pixel (x, y) shows the input at
/// transform^-1(x, y); applying align_rigid's result brings a frame into
/// its reference's coordinate system.
Image warp_rigid(const Image& img, const RigidTransform& transform);

/// Bilinearly resample the crop square to out_side x out_side.
Image extract_crop(const Image& img, const CropSpec& spec, int out_side);

}  // namespace slstt
