#include "slstt/landmarks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "slstt/error.hpp"

namespace slstt {

void LandmarkSet::validate() const {
    require(static_cast<int>(x.size()) == kCount && static_cast<int>(y.size()) == kCount,
            "landmark set must contain exactly 68 points");
    for (int i = 0; i < kCount; ++i)
        require(std::isfinite(x[i]) && std::isfinite(y[i]), "non-finite landmark coordinate");
}

std::pair<double, double> RigidTransform::apply(double x, double y) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * x - s * y + tx, s * x + c * y + ty};
}

std::pair<double, double> RigidTransform::apply_inverse(double x, double y) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double dx = x - tx, dy = y - ty;
    return {c * dx + s * dy, -s * dx + c * dy};
}

LandmarkSet load_landmarks(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "cannot open: " + path);
    LandmarkSet set;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double x, y;
        require(static_cast<bool>(ls >> x >> y), "malformed landmark line in " + path);
        set.x.push_back(x);
        set.y.push_back(y);
    }
    require(static_cast<int>(set.x.size()) == LandmarkSet::kCount,
            "expected 68 landmark lines in " + path);
    set.validate();
    return set;
}

void save_landmarks(const std::string& path, const LandmarkSet& set) {
    set.validate();
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot open for writing: " + path);
    os.precision(10);
    for (int i = 0; i < LandmarkSet::kCount; ++i) os << set.x[i] << " " << set.y[i] << "\n";
    require(static_cast<bool>(os), "write failed: " + path);
}

CropSpec crop_square(const LandmarkSet& apex_landmarks) {
    apex_landmarks.validate();
    const auto& y = apex_landmarks.y;
    const double side = (y[8] - y[19]) + (y[8] - y[57]);
    require(side > 0.0, "degenerate landmarks: non-positive crop side");
    return {apex_landmarks.x[30], apex_landmarks.y[30], side};
}

RigidTransform align_rigid(const LandmarkSet& frame, const LandmarkSet& reference) {
    frame.validate();
    reference.validate();
    const int n = LandmarkSet::kCount;
    double pcx = 0, pcy = 0, qcx = 0, qcy = 0;
    for (int i = 0; i < n; ++i) {
        pcx += frame.x[i];
        pcy += frame.y[i];
        qcx += reference.x[i];
        qcy += reference.y[i];
    }
    pcx /= n;
    pcy /= n;
    qcx /= n;
    qcy /= n;

    // 2D orthogonal Procrustes on centered points. Restricting the
    // orthogonal factor to det=+1 gives the closed form below; a reflection
    // never enters, and the determinant is checked anyway.
    double dot = 0, cross = 0, pnorm = 0, qnorm = 0;
    for (int i = 0; i < n; ++i) {
        const double px = frame.x[i] - pcx, py = frame.y[i] - pcy;
        const double qx = reference.x[i] - qcx, qy = reference.y[i] - qcy;
        dot += px * qx + py * qy;
        cross += px * qy - py * qx;
        pnorm += px * px + py * py;
        qnorm += qx * qx + qy * qy;
    }
    require(pnorm > 1e-12 && qnorm > 1e-12, "degenerate landmarks: all points coincident");

    RigidTransform t;
    t.theta = std::atan2(cross, dot);
    const double c = std::cos(t.theta), s = std::sin(t.theta);
    require(c * c + s * s > 0.5, "rigid fit produced a non-rotation");  // det(R) = +1
    t.tx = qcx - (c * pcx - s * pcy);
    t.ty = qcy - (s * pcx + c * pcy);
    return t;
}

double rigid_residual(const LandmarkSet& frame, const LandmarkSet& reference,
                      const RigidTransform& transform) {
    double total = 0.0;
    for (int i = 0; i < LandmarkSet::kCount; ++i) {
        const auto [x, y] = transform.apply(frame.x[i], frame.y[i]);
        const double dx = x - reference.x[i], dy = y - reference.y[i];
        total += dx * dx + dy * dy;
    }
    return total;
}

Image warp_rigid(const Image& img, const RigidTransform& transform) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const auto [sx, sy] = transform.apply_inverse(x, y);
            for (int c = 0; c < img.channels; ++c)
                out.data[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                    sample_bilinear(img, sx, sy, c);
        }
    return out;
}

Image extract_crop(const Image& img, const CropSpec& spec, int out_side) {
    require(spec.side > 0.0, "crop side must be positive");
    require(out_side > 0, "output side must be positive");
    Image out(out_side, out_side, img.channels);
    const double x0 = spec.center_x - spec.side / 2.0;
    const double y0 = spec.center_y - spec.side / 2.0;
    const double step = spec.side / out_side;
    for (int y = 0; y < out_side; ++y)
        for (int x = 0; x < out_side; ++x) {
            const double sx = x0 + (x + 0.5) * step - 0.5;
            const double sy = y0 + (y + 0.5) * step - 0.5;
            for (int c = 0; c < img.channels; ++c)
                out.data[(static_cast<size_t>(y) * out_side + x) * img.channels + c] =
                    sample_bilinear(img, sx, sy, c);
        }
    return out;
}

}  // namespace slstt
