#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "slstt/error.hpp"
#include "slstt/flow.hpp"

using namespace slstt;

namespace {

// Smooth analytic texture so a shifted frame can be rendered exactly.
double texture(double x, double y) {
    double v = 128.0 + 45.0 * std::sin(2.0 * 3.14159265358979 * x / 21.0) *
                           std::cos(2.0 * 3.14159265358979 * y / 17.0);
    auto blob = [&](double cx, double cy, double s, double a) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        return a * std::exp(-d2 / (2.0 * s * s));
    };
    v += blob(20, 24, 5.0, 60.0);
    v += blob(44, 40, 6.0, -55.0);
    v += blob(32, 12, 4.0, 40.0);
    return v;
}

Image render(int side, double dx, double dy) {
    Image img(side, side, 1);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) img.at(x, y, 0) = texture(x - dx, y - dy);
    return img;
}

}  // namespace

TEST_CASE("identical frames give an (exactly) zero field") {
    Image frame = render(32, 0, 0);
    FlowField field = estimate_flow(frame, frame, FlowParams{});
    double peak = 0.0;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) peak = std::max(peak, field.magnitude(x, y));
    CHECK(peak <= 1e-6);
}

TEST_CASE("translation is recovered within half a pixel") {
    const Image ref = render(64, 0, 0);
    for (auto [dx, dy] : {std::pair{2.0, 0.0}, std::pair{0.0, -1.5}, std::pair{1.0, 1.0}}) {
        const Image tgt = render(64, dx, dy);
        FlowField field = estimate_flow(ref, tgt, FlowParams{});
        double err = 0.0;
        int count = 0;
        for (int y = 8; y < 56; ++y)
            for (int x = 8; x < 56; ++x) {
                const size_t i = static_cast<size_t>(y) * 64 + x;
                err += std::hypot(field.u[i] - dx, field.v[i] - dy);
                ++count;
            }
        CHECK(err / count <= 0.5);
    }
}

TEST_CASE("estimation is deterministic") {
    const Image ref = render(32, 0, 0);
    const Image tgt = render(32, 1.0, 0.5);
    FlowField a = estimate_flow(ref, tgt, FlowParams{});
    FlowField b = estimate_flow(ref, tgt, FlowParams{});
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
}

TEST_CASE("too-small images for the pyramid are rejected") {
    Image tiny(16, 16, 1);
    CHECK_THROWS_AS(estimate_flow(tiny, tiny, FlowParams{15.0, 10, 3}), Error);
    CHECK_NOTHROW(estimate_flow(tiny, tiny, FlowParams{15.0, 10, 1}));
}

TEST_CASE("long-term flow anchors at the onset and peaks at the apex") {
    // Displacement ramps 0 -> 3 px -> 0 with the apex in the middle.
    const int apex = 3;
    std::vector<Image> frames;
    for (int t = 0; t <= 6; ++t) {
        const double d = 3.0 * (1.0 - std::fabs(t - apex) / 3.0);
        frames.push_back(render(64, d, 0.0));
    }
    auto fields = long_term_flow(frames, 0, FlowParams{});
    REQUIRE(fields.size() == frames.size());
    CHECK(fields[0].mean_magnitude(8) == 0.0);  // onset frame: exact zero
    int argmax = 0;
    double best = -1.0;
    for (size_t t = 0; t < fields.size(); ++t) {
        const double m = fields[t].mean_magnitude(8);
        if (m > best) {
            best = m;
            argmax = static_cast<int>(t);
        }
    }
    CHECK(argmax == apex);
}

TEST_CASE("zero flow colorizes to white, +x to the zero-angle color") {
    FlowField field(4, 1);
    field.u = {0.0, 1.0, 0.0, -1.0};
    field.v = {0.0, 0.0, 1.0, 0.0};
    Image img = colorize_flow(field, 1.0);
    // zero -> white
    CHECK(img.at(0, 0, 0) == doctest::Approx(255.0));
    CHECK(img.at(0, 0, 1) == doctest::Approx(255.0));
    CHECK(img.at(0, 0, 2) == doctest::Approx(255.0));
    // +x at full magnitude -> hue 0, full saturation
    CHECK(img.at(1, 0, 0) == doctest::Approx(255.0));
    CHECK(img.at(1, 0, 1) == doctest::Approx(0.0));
    CHECK(img.at(1, 0, 2) == doctest::Approx(0.0));
    // opposite directions get different colors
    bool differs = false;
    for (int c = 0; c < 3; ++c)
        if (std::fabs(img.at(1, 0, c) - img.at(3, 0, c)) > 1.0) differs = true;
    CHECK(differs);
    // determinism, bitwise
    Image again = colorize_flow(field, 1.0);
    CHECK(img.data == again.data);
}

TEST_CASE("colorize saturates at max_magnitude") {
    FlowField field(2, 1);
    field.u = {10.0, 1.0};
    field.v = {0.0, 0.0};
    Image img = colorize_flow(field, 1.0);
    for (int c = 0; c < 3; ++c) CHECK(img.at(0, 0, c) == doctest::Approx(img.at(1, 0, c)));
}

TEST_CASE("flow files round-trip") {
    FlowField field(5, 3);
    for (size_t i = 0; i < field.u.size(); ++i) {
        field.u[i] = 0.125 * static_cast<double>(i) - 0.8;
        field.v[i] = -0.25 * static_cast<double>(i) + 1.5;
    }
    const std::string p1 = "slstt_test_a.flo", p2 = "slstt_test_b.flo";
    save_flow(p1, field);
    FlowField back = load_flow(p1);
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    for (size_t i = 0; i < field.u.size(); ++i) {
        CHECK(back.u[i] == doctest::Approx(field.u[i]).epsilon(1e-6));
        CHECK(back.v[i] == doctest::Approx(field.v[i]).epsilon(1e-6));
    }
    // a second save of the loaded field reproduces the bytes exactly
    save_flow(p2, back);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("corrupt flow files are rejected") {
    const std::string path = "slstt_test_bad.flo";
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(load_flow(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_flow("missing_file.flo"), Error);
}
