#include "slstt/synth.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "slstt/error.hpp"
#include "slstt/rng.hpp"

namespace fs = std::filesystem;

namespace slstt {

void SynthSpec::validate() const {
    require(classes() >= 2, "need at least two classes");
    require(subjects >= 1 && samples_per_subject >= 1, "need at least one subject and sample");
    require(image_side >= 16, "synthetic frames should be at least 16 px");
    require(frames >= 3, "need at least three frames for a ramp");
    require(peak_displacement >= 0.0, "peak displacement must be non-negative");
    require(noise_std >= 0.0, "noise std must be non-negative");
}

std::string SynthSpec::label_of(int k) const {
    const int deg = static_cast<int>(std::lround(class_directions_deg[k]));
    std::ostringstream os;
    os << "deg";
    os.width(3);
    os.fill('0');
    os << ((deg % 360) + 360) % 360;
    return os.str();
}

namespace {

// Smooth per-subject texture: low-frequency sinusoids with subject-specific
// phases, plus a displaced bright blob.
double render_pixel(double x, double y, double side, const double phase[4], double bx,
                    double by) {
    const double tau = 6.283185307179586;
    double v = 118.0;
    v += 34.0 * std::sin(tau * x / side * 1.7 + phase[0]);
    v += 30.0 * std::cos(tau * y / side * 1.3 + phase[1]);
    v += 22.0 * std::sin(tau * (x + y) / side * 2.1 + phase[2]);
    const double sigma = side / 7.0;
    const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
    v += 95.0 * std::exp(-d2 / (2.0 * sigma * sigma));
    v += 12.0 * std::sin(tau * (x - y) / side * 0.9 + phase[3]);
    return v;
}

}  // namespace

std::vector<SampleRecord> synth_generate(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    require(fs::is_directory(out_dir), "cannot create output directory: " + out_dir);

    std::vector<SampleRecord> records;
    const int side = spec.image_side;
    const double cx = side / 2.0, cy = side / 2.0;
    const int apex = (spec.frames - 1) / 2;

    for (int s = 0; s < spec.subjects; ++s) {
        Rng subject_rng = Rng::derive(spec.seed, {0x51, static_cast<std::uint64_t>(s)});
        double phase[4];
        for (double& p : phase) p = subject_rng.uniform(0.0, 6.283185307179586);

        for (int k = 0; k < spec.samples_per_subject; ++k) {
            const int cls = (s * spec.samples_per_subject + k) % spec.classes();
            const double angle = spec.class_directions_deg[cls] * 3.14159265358979323846 / 180.0;
            std::ostringstream sid;
            sid << "synth_s" << s << "_r" << k;
            const std::string clip_dir = out_dir + "/" + sid.str();
            fs::create_directories(clip_dir, ec);
            require(fs::is_directory(clip_dir), "cannot create clip directory: " + clip_dir);

            SampleRecord r;
            r.sample_id = sid.str();
            r.dataset = "SYNTH";
            r.subject_id = "subj" + std::to_string(s);
            r.frames_dir = clip_dir;
            r.onset = 0;
            r.apex = apex;
            r.offset = spec.frames - 1;
            r.label = spec.label_of(cls);

            for (int t = 0; t < spec.frames; ++t) {
                // displacement ramps 0 -> peak at the apex -> 0 at the offset
                const double ramp =
                    1.0 - std::fabs(static_cast<double>(t - apex)) / static_cast<double>(apex);
                const double d = spec.peak_displacement * std::max(0.0, ramp);
                const double bx = cx + d * std::cos(angle);
                const double by = cy + d * std::sin(angle);
                Rng noise = Rng::derive(spec.seed, {0x52, static_cast<std::uint64_t>(s),
                                                    static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(t)});
                Image img(side, side, 1);
                for (int y = 0; y < side; ++y)
                    for (int x = 0; x < side; ++x)
                        img.at(x, y, 0) = render_pixel(x, y, side, phase, bx, by) +
                                          spec.noise_std * noise.normal();
                std::ostringstream fp;
                fp << clip_dir << "/";
                fp.width(6);
                fp.fill('0');
                fp << t;
                write_pgm(fp.str() + ".pgm", img);
            }
            records.push_back(std::move(r));
        }
    }
    save_manifest(out_dir + "/manifest.csv", records);
    return records;
}

}  // namespace slstt
