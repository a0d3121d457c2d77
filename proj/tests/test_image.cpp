#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "slstt/error.hpp"
#include "slstt/image.hpp"

using namespace slstt;

namespace {

std::string tmp_path(const std::string& name) {
    return std::string("slstt_test_") + name;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("grayscale uses BT.601 weights") {
    Image img(1, 1, 3);
    img.at(0, 0, 0) = 255.0;  // pure red
    Image g = to_grayscale(img);
    CHECK(g.channels == 1);
    CHECK(g.at(0, 0, 0) == doctest::Approx(0.299 * 255.0).epsilon(1e-12));
    Image gray(2, 2, 1);
    gray.at(0, 0, 0) = 42.0;
    CHECK(to_grayscale(gray).at(0, 0, 0) == 42.0);  // identity on single channel
}

TEST_CASE("bilinear sampling interpolates and clamps") {
    Image img(2, 2, 1);
    img.at(0, 0, 0) = 0.0;
    img.at(1, 0, 0) = 10.0;
    img.at(0, 1, 0) = 20.0;
    img.at(1, 1, 0) = 30.0;
    CHECK(sample_bilinear(img, 0, 0, 0) == 0.0);
    CHECK(sample_bilinear(img, 1, 0, 0) == 10.0);
    CHECK(sample_bilinear(img, 0.5, 0.5, 0) == doctest::Approx(15.0));
    CHECK(sample_bilinear(img, 0.5, 0, 0) == doctest::Approx(5.0));
    // outside the grid clamps to the border
    CHECK(sample_bilinear(img, -5, 0, 0) == 0.0);
    CHECK(sample_bilinear(img, 5, 5, 0) == 30.0);
}

TEST_CASE("resize to the same size is the identity") {
    Image img(3, 2, 1);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) img.at(x, y, 0) = x * 10 + y;
    Image out = resize_bilinear(img, 3, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) CHECK(out.at(x, y, 0) == doctest::Approx(img.at(x, y, 0)));
}

TEST_CASE("resize of a constant image stays constant") {
    Image img(4, 4, 3);
    for (auto& v : img.data) v = 127.0;
    Image out = resize_bilinear(img, 9, 5);
    for (double v : out.data) CHECK(v == doctest::Approx(127.0));
}

TEST_CASE("pgm round-trip is exact for integer values") {
    Image img(3, 2, 1);
    int k = 0;
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) img.at(x, y, 0) = (k += 40) % 256;
    const std::string path = tmp_path("roundtrip.pgm");
    write_pgm(path, img);
    Image back = read_pnm(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.channels == 1);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) CHECK(back.at(x, y, 0) == img.at(x, y, 0));
    std::remove(path.c_str());
}

TEST_CASE("ppm round-trip and re-save are bit-identical") {
    Image img(2, 2, 3);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>((i * 23) % 256);
    const std::string p1 = tmp_path("a.ppm"), p2 = tmp_path("b.ppm");
    write_ppm(p1, img);
    Image back = read_pnm(p1);
    write_ppm(p2, back);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("ascii and binary pnm variants parse alike") {
    const std::string pa = tmp_path("ascii.pgm");
    {
        std::ofstream os(pa);
        os << "P2\n# a comment line\n3 1\n255\n0 128 255\n";
    }
    Image img = read_pnm(pa);
    CHECK(img.width == 3);
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(1, 0, 0) == 128.0);
    CHECK(img.at(2, 0, 0) == 255.0);
    std::remove(pa.c_str());

    const std::string pc = tmp_path("color.ppm");
    {
        std::ofstream os(pc);
        os << "P3\n1 1\n255\n10 20 30\n";
    }
    Image rgb = read_pnm(pc);
    CHECK(rgb.channels == 3);
    CHECK(rgb.at(0, 0, 0) == 10.0);
    CHECK(rgb.at(0, 0, 1) == 20.0);
    CHECK(rgb.at(0, 0, 2) == 30.0);
    std::remove(pc.c_str());
}

TEST_CASE("malformed image files are rejected with diagnostics") {
    const std::string bad = tmp_path("bad.pgm");
    {
        std::ofstream os(bad);
        os << "Q5\n2 2\n255\n";
    }
    CHECK_THROWS_AS(read_pnm(bad), Error);
    std::remove(bad.c_str());
    CHECK_THROWS_AS(read_pnm("definitely_missing_file.pgm"), Error);
}

TEST_CASE("values outside 0..255 are clamped on write") {
    Image img(2, 1, 1);
    img.at(0, 0, 0) = -50.0;
    img.at(1, 0, 0) = 400.0;
    const std::string path = tmp_path("clamp.pgm");
    write_pgm(path, img);
    Image back = read_pnm(path);
    CHECK(back.at(0, 0, 0) == 0.0);
    CHECK(back.at(1, 0, 0) == 255.0);
    std::remove(path.c_str());
}
