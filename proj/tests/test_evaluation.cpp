#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "slstt/error.hpp"
#include "slstt/flow.hpp"
#include "slstt/manifest.hpp"
#include "slstt/metrics.hpp"
#include "slstt/protocol.hpp"
#include "slstt/rng.hpp"
#include "slstt/synth.hpp"

using namespace slstt;
namespace fs = std::filesystem;

namespace {

// Independent per-class reimplementation of the metrics, kept deliberately
// different in structure from the library loops.
struct BruteScores {
    double uf1 = 0, uar = 0, accuracy = 0, macro_f1 = 0;
};

BruteScores brute_force(const ConfusionMatrix& cm) {
    const int c = cm.classes();
    BruteScores out;
    long long diag = 0;
    for (int k = 0; k < c; ++k) {
        long long tp = cm.at(k, k), fp = 0, fn = 0, support = 0;
        for (int j = 0; j < c; ++j) {
            support += cm.at(k, j);
            if (j != k) {
                fn += cm.at(k, j);
                fp += cm.at(j, k);
            }
        }
        diag += tp;
        if (2 * tp + fp + fn > 0)
            out.uf1 += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn) /
                       static_cast<double>(c);
        if (support > 0)
            out.uar += static_cast<double>(tp) / static_cast<double>(support) /
                       static_cast<double>(c);
    }
    out.accuracy = static_cast<double>(diag) / static_cast<double>(cm.total());
    out.macro_f1 = out.uf1;
    return out;
}

ConfusionMatrix random_matrix(Rng& rng) {
    const int c = 2 + static_cast<int>(rng.uniform_index(7));  // 2..8
    std::vector<std::string> names;
    for (int i = 0; i < c; ++i) names.push_back("k" + std::to_string(i));
    ConfusionMatrix cm(std::move(names));
    for (int t = 0; t < c; ++t)
        for (int p = 0; p < c; ++p)
            cm.add(t, p, static_cast<long long>(rng.uniform_index(10)));
    if (cm.total() == 0) cm.add(0, 0, 1);
    return cm;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(static_cast<bool>(is));
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<ClipSample> labeled_samples(const std::vector<int>& labels) {
    std::vector<ClipSample> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ClipSample s;
        s.sample_id = "s" + std::to_string(i);
        s.dataset = "SYNTH";
        s.subject_id = "subj" + std::to_string(i / 2);
        s.label = labels[i];
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

TEST_CASE("the worked 2x2 matrix scores exactly") {
    ConfusionMatrix cm({"a", "b"});
    cm.add(0, 0, 3);
    cm.add(0, 1, 1);
    cm.add(1, 0, 1);
    cm.add(1, 1, 1);
    CHECK(uf1(cm) == 0.625);  // class F1s 0.75 and 0.5
    CHECK(uar(cm) == 0.625);  // recalls 0.75 and 0.5
    const auto [acc, f1] = accuracy_and_macro_f1(cm);
    CHECK(acc == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(f1 == 0.625);
    CHECK(degenerate_classes(cm).empty());
}

TEST_CASE("a perfect diagonal scores one everywhere") {
    ConfusionMatrix cm({"x", "y", "z"});
    for (int k = 0; k < 3; ++k) cm.add(k, k, 4);
    CHECK(uf1(cm) == 1.0);
    CHECK(uar(cm) == 1.0);
    const auto [acc, f1] = accuracy_and_macro_f1(cm);
    CHECK(acc == 1.0);
    CHECK(f1 == 1.0);
}

TEST_CASE("collapsed predictors score the textbook values") {
    // Two balanced classes, everything predicted into the first.
    ConfusionMatrix two({"a", "b"});
    two.add(0, 0, 3);
    two.add(1, 0, 3);
    CHECK(uf1(two) == doctest::Approx((2.0 / 3.0 + 0.0) / 2.0).epsilon(1e-15));
    CHECK(uar(two) == 0.5);

    // Three balanced classes, constant predictor: UAR = 1/C.
    ConfusionMatrix three({"a", "b", "c"});
    for (int t = 0; t < 3; ++t) three.add(t, 0, 2);
    CHECK(uar(three) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("metrics match a brute-force oracle on random matrices") {
    Rng rng(90);
    for (int trial = 0; trial < 100; ++trial) {
        ConfusionMatrix cm = random_matrix(rng);
        const BruteScores want = brute_force(cm);
        CHECK(std::fabs(uf1(cm) - want.uf1) <= 1e-12);
        CHECK(std::fabs(uar(cm) - want.uar) <= 1e-12);
        const auto [acc, f1] = accuracy_and_macro_f1(cm);
        CHECK(std::fabs(acc - want.accuracy) <= 1e-12);
        CHECK(std::fabs(f1 - want.macro_f1) <= 1e-12);
        CHECK(uf1(cm) >= 0.0);
        CHECK(uf1(cm) <= 1.0);
        CHECK(uar(cm) >= 0.0);
        CHECK(uar(cm) <= 1.0);
    }
}

TEST_CASE("scores are invariant under class relabeling") {
    Rng rng(91);
    for (int trial = 0; trial < 20; ++trial) {
        ConfusionMatrix cm = random_matrix(rng);
        const int c = cm.classes();
        std::vector<int> perm(static_cast<std::size_t>(c));
        for (int i = 0; i < c; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        std::vector<std::string> names(static_cast<std::size_t>(c));
        for (int i = 0; i < c; ++i)
            names[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
                cm.class_names[static_cast<std::size_t>(i)];
        ConfusionMatrix shuffled(std::move(names));
        for (int t = 0; t < c; ++t)
            for (int p = 0; p < c; ++p)
                shuffled.add(perm[static_cast<std::size_t>(t)],
                             perm[static_cast<std::size_t>(p)], cm.at(t, p));
        CHECK(std::fabs(uf1(shuffled) - uf1(cm)) <= 1e-12);
        CHECK(std::fabs(uar(shuffled) - uar(cm)) <= 1e-12);
    }
}

TEST_CASE("classes absent from truth and prediction are flagged, not scored") {
    ConfusionMatrix cm({"a", "b", "ghost"});
    cm.add(0, 0, 2);
    cm.add(1, 1, 3);
    CHECK(degenerate_classes(cm) == std::vector<std::string>{"ghost"});
    CHECK(uf1(cm) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(uar(cm) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("uniform random predictions land near chance accuracy") {
    Rng rng(92);
    const int c = 4;
    ConfusionMatrix cm({"a", "b", "c", "d"});
    for (int i = 0; i < 10000; ++i)
        cm.add(static_cast<int>(rng.uniform_index(c)), static_cast<int>(rng.uniform_index(c)));
    const auto [acc, f1] = accuracy_and_macro_f1(cm);
    CHECK(std::fabs(acc - 0.25) <= 0.1);
    CHECK(std::fabs(f1 - 0.25) <= 0.1);
}

TEST_CASE("confusion matrix bookkeeping is validated") {
    ConfusionMatrix cm({"a", "b"});
    cm.add(0, 1);
    CHECK(cm.total() == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK_THROWS_AS(cm.add(2, 0), Error);
    CHECK_THROWS_AS(cm.at(0, -1), Error);
    CHECK_THROWS_AS(ConfusionMatrix({"only"}), Error);
    ConfusionMatrix other({"a", "c"});
    CHECK_THROWS_AS(cm += other, Error);
    ConfusionMatrix same({"a", "b"});
    same.add(1, 1, 5);
    cm += same;
    CHECK(cm.at(1, 1) == 5);
    CHECK(cm.total() == 6);
}

TEST_CASE("confusion csv carries a name header row and column") {
    ConfusionMatrix cm({"neg", "pos"});
    cm.add(0, 0, 2);
    cm.add(1, 0, 1);
    std::ostringstream os;
    write_confusion_csv(os, cm);
    CHECK(os.str() == "true\\predicted,neg,pos\nneg,2,0\npos,1,0\n");
}

TEST_CASE("prediction csv round-trips into a confusion matrix") {
    const std::string path = "slstt_test_preds.csv";
    {
        std::ofstream os(path);
        os << "sample_id,true_label,predicted_label\n";
        os << "s1,pos,pos\n";
        os << "s2,neg,pos\n";
        os << "s3,neg,neg\n";
    }
    const auto pairs = load_predictions_csv(path);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[1] == std::pair<std::string, std::string>{"neg", "pos"});
    ConfusionMatrix cm = confusion_from_pairs(pairs);
    CHECK(cm.class_names == std::vector<std::string>{"neg", "pos"});
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    std::remove(path.c_str());

    {
        std::ofstream os(path);
        os << "wrong,header,row\ns1,a,b\n";
    }
    CHECK_THROWS_AS(load_predictions_csv(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_predictions_csv("slstt_missing_preds.csv"), Error);
}

// ---------------------------------------------------------------------------
// composite label merge and protocol specs
// ---------------------------------------------------------------------------

TEST_CASE("composite label merge follows the documented table") {
    CHECK(cde_label_map("CASME2", "Happiness") == CdeClass::Positive);
    CHECK(cde_label_map("SMIC-HS", "positive") == CdeClass::Positive);
    CHECK(cde_label_map("SAMM", "happiness") == CdeClass::Positive);  // case-insensitive
    CHECK(cde_label_map("SMIC-HS", "surprise") == CdeClass::Surprise);
    CHECK(cde_label_map("CASME2", "Surprise") == CdeClass::Surprise);
    for (const char* l : {"Disgust", "Repression", "Anger", "Contempt", "Fear", "Sadness"})
        CHECK(cde_label_map("SAMM", l) == CdeClass::Negative);
    CHECK(cde_label_map("SMIC-HS", "negative") == CdeClass::Negative);
    CHECK(cde_label_map("CASME2", "Others") == CdeClass::Excluded);
    CHECK(cde_label_map("SAMM", "Other") == CdeClass::Excluded);
    CHECK_THROWS_WITH(cde_label_map("CASME2", "Boredom"), doctest::Contains("Boredom"));
}

TEST_CASE("protocol label sets per corpus") {
    const std::vector<SampleRecord> none;
    CHECK(make_protocol(ProtocolKind::SDE, "SMIC-HS", none).label_set ==
          std::vector<std::string>{"negative", "positive", "surprise"});
    CHECK(make_protocol(ProtocolKind::SDE, "CASME2", none).label_set ==
          std::vector<std::string>{"Happiness", "Disgust", "Surprise", "Repression", "Others"});
    CHECK(make_protocol(ProtocolKind::SDE, "SAMM", none).label_set ==
          std::vector<std::string>{"Anger", "Happiness", "Other", "Surprise", "Contempt"});
    CHECK(make_protocol(ProtocolKind::CDE, "", none).label_set ==
          std::vector<std::string>{"negative", "positive", "surprise"});
    CHECK_THROWS_AS(make_protocol(ProtocolKind::SDE, "", none), Error);

    std::vector<SampleRecord> synth(3);
    synth[0].dataset = "SYNTH";
    synth[0].label = "deg090";
    synth[1].dataset = "SYNTH";
    synth[1].label = "deg000";
    synth[2].dataset = "SYNTH";
    synth[2].label = "deg090";
    CHECK(make_protocol(ProtocolKind::SDE, "SYNTH", synth).label_set ==
          std::vector<std::string>{"deg000", "deg090"});
    synth[1].label = "deg090";
    CHECK_THROWS_AS(make_protocol(ProtocolKind::SDE, "SYNTH", synth), Error);
}

TEST_CASE("map_label resolves indices, exclusions and unknowns") {
    const std::vector<SampleRecord> none;
    const ProtocolSpec sde = make_protocol(ProtocolKind::SDE, "CASME2", none);
    CHECK(map_label(sde, "CASME2", "Disgust") == 1);
    CHECK(map_label(sde, "CASME2", "Others") == 4);  // scored under SDE
    CHECK(!map_label(sde, "CASME2", "Fear").has_value());  // known but too rare
    CHECK_THROWS_WITH(map_label(sde, "CASME2", "Boredom"), doctest::Contains("Boredom"));

    const ProtocolSpec cde = make_protocol(ProtocolKind::CDE, "", none);
    CHECK(map_label(cde, "SMIC-HS", "negative") == 0);
    CHECK(map_label(cde, "CASME2", "Happiness") == 1);
    CHECK(map_label(cde, "SAMM", "Surprise") == 2);
    CHECK(!map_label(cde, "CASME2", "Others").has_value());
}

// ---------------------------------------------------------------------------
// LOSO splits
// ---------------------------------------------------------------------------

TEST_CASE("loso splits partition the composite manifest shape") {
    std::vector<ClipSample> samples;
    auto add_block = [&](const std::string& dataset, int subjects) {
        for (int s = 0; s < subjects; ++s) {
            for (int k = 0; k < 2; ++k) {
                ClipSample cs;
                cs.dataset = dataset;
                std::ostringstream id;
                id.width(3);
                id.fill('0');
                id << s;
                cs.subject_id = "s" + id.str();
                cs.sample_id = dataset + cs.subject_id + "_" + std::to_string(k);
                samples.push_back(std::move(cs));
            }
        }
    };
    add_block("SMIC-HS", 16);
    add_block("CASME2", 24);
    add_block("SAMM", 28);

    const auto folds = loso_splits(samples);
    CHECK(folds.size() == 68);
    std::vector<int> seen(samples.size(), 0);
    for (const auto& fold : folds) {
        CHECK(fold.test.size() == 2);
        CHECK(fold.train.size() == samples.size() - 2);
        for (int i : fold.test) {
            seen[static_cast<std::size_t>(i)] += 1;
            CHECK(samples[static_cast<std::size_t>(i)].subject_id == fold.subject_id);
            CHECK(samples[static_cast<std::size_t>(i)].dataset == fold.dataset);
            CHECK(std::find(fold.train.begin(), fold.train.end(), i) == fold.train.end());
        }
        for (int i : fold.train) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            CHECK((s.dataset != fold.dataset || s.subject_id != fold.subject_id));
        }
    }
    for (int count : seen) CHECK(count == 1);  // every sample held out exactly once
    CHECK(std::is_sorted(folds.begin(), folds.end(), [](const Fold& a, const Fold& b) {
        return std::tie(a.dataset, a.subject_id) < std::tie(b.dataset, b.subject_id);
    }));
}

TEST_CASE("subjects are scoped to their dataset") {
    std::vector<ClipSample> samples(2);
    samples[0].dataset = "SMIC-HS";
    samples[0].subject_id = "s01";
    samples[1].dataset = "SAMM";
    samples[1].subject_id = "s01";
    CHECK(loso_splits(samples).size() == 2);  // same id, different corpus
    CHECK_THROWS_AS(loso_splits({}), Error);
}

// ---------------------------------------------------------------------------
// scoring and reports
// ---------------------------------------------------------------------------

TEST_CASE("an oracle predictor scores one under every metric") {
    const auto samples = labeled_samples({0, 1, 2, 0, 1, 2});
    ProtocolSpec spec;
    spec.kind = ProtocolKind::SDE;
    spec.dataset_filter = "SYNTH";
    spec.label_set = {"a", "b", "c"};
    std::vector<int> predictions = {0, 1, 2, 0, 1, 2};
    const ProtocolReport report = score_predictions(samples, predictions, spec);
    CHECK(report.accuracy == 1.0);
    CHECK(report.macro_f1 == 1.0);
    CHECK(report.uf1_value == 1.0);
    CHECK(report.uar_value == 1.0);
    CHECK(report.pooled.total() == 6);
    CHECK(report.folds.size() == 1);
    CHECK(report.degenerate.empty());

    const auto parsed = nlohmann::json::parse(report_json(report));
    CHECK(parsed["protocol"] == "SDE");
    CHECK(parsed["dataset"] == "SYNTH");
    CHECK(parsed["pooled"]["uf1"] == 1.0);
    CHECK(parsed["pooled"]["uar"] == 1.0);
    CHECK(parsed["per_dataset"]["SYNTH"]["accuracy"] == 1.0);
    CHECK(parsed["folds"].size() == 1);

    CHECK_THROWS_AS(score_predictions(samples, {0, 1}, spec), Error);
}

TEST_CASE("pooling fold matrices by summation equals concatenated scoring") {
    Rng rng(93);
    std::vector<std::string> names = {"a", "b", "c"};
    ConfusionMatrix pooled(names);
    ConfusionMatrix concatenated(names);
    for (int fold = 0; fold < 5; ++fold) {
        ConfusionMatrix part(names);
        for (int i = 0; i < 30; ++i) {
            const int t = static_cast<int>(rng.uniform_index(3));
            const int p = static_cast<int>(rng.uniform_index(3));
            part.add(t, p);
            concatenated.add(t, p);
        }
        pooled += part;
    }
    CHECK(pooled.counts == concatenated.counts);
    CHECK(std::fabs(uf1(pooled) - uf1(concatenated)) <= 1e-12);
    CHECK(std::fabs(uar(pooled) - uar(concatenated)) <= 1e-12);
}

TEST_CASE("run_protocol keeps fold bookkeeping straight on a tiny separable set") {
    ModelSpec model;
    model.embed.image_side = 8;
    model.embed.patch_side = 4;
    model.embed.channels = 1;
    model.embed.width = 4;
    model.encoder.layers = 1;
    model.encoder.heads = 2;
    model.encoder.width = 4;
    model.aggregator = Aggregator::Mean;
    model.classes = 2;
    model.frames = 1;

    Rng rng(94);
    std::vector<ClipSample> samples;
    for (int subj = 0; subj < 2; ++subj)
        for (int k = 0; k < 2; ++k) {
            ClipSample s;
            s.sample_id = "clip" + std::to_string(subj * 2 + k);
            s.dataset = "SYNTH";
            s.subject_id = "subj" + std::to_string(subj);
            s.label = k % 2;
            Image img(8, 8, 1);
            for (double& v : img.data) v = (s.label == 0 ? 0.2 : 0.8) + 0.02 * rng.normal();
            s.inputs = {img};
            samples.push_back(std::move(s));
        }

    ProtocolSpec spec;
    spec.kind = ProtocolKind::SDE;
    spec.dataset_filter = "SYNTH";
    spec.label_set = {"lo", "hi"};
    TrainConfig config;
    config.epochs = 2;
    config.seed = 5;

    const ProtocolReport report = run_protocol(samples, spec, model, config);
    CHECK(report.folds.size() == 2);
    CHECK(report.pooled.total() == 4);
    CHECK(report.by_dataset.count("SYNTH") == 1);
    CHECK(report.by_dataset.at("SYNTH").total() == 4);
    for (const auto& fold : report.folds) {
        CHECK(fold.confusion.total() == 2);
        CHECK(fold.test_sample_ids.size() == 2);
        CHECK(fold.accuracy >= 0.0);
        CHECK(fold.accuracy <= 1.0);
    }

    std::ostringstream os;
    write_report_csv(os, report);
    const std::string csv = os.str();
    CHECK(csv.find("# pooled") != std::string::npos);
    CHECK(csv.find("# fold SYNTH subj0") != std::string::npos);
    CHECK(csv.find("# fold SYNTH subj1") != std::string::npos);
}

TEST_CASE("a single-subject manifest is an untrainable fold") {
    ModelSpec model;
    model.embed.image_side = 8;
    model.embed.patch_side = 4;
    model.embed.channels = 1;
    model.embed.width = 4;
    model.encoder.layers = 1;
    model.encoder.heads = 2;
    model.encoder.width = 4;
    model.classes = 2;
    model.frames = 1;
    auto samples = labeled_samples({0, 1});
    for (auto& s : samples) {
        s.subject_id = "only";
        s.inputs = {Image(8, 8, 1)};
    }
    ProtocolSpec spec;
    spec.kind = ProtocolKind::SDE;
    spec.dataset_filter = "SYNTH";
    spec.label_set = {"a", "b"};
    CHECK_THROWS_WITH(run_protocol(samples, spec, model, TrainConfig{}),
                      doctest::Contains("empty training set"));
}

// ---------------------------------------------------------------------------
// manifests
// ---------------------------------------------------------------------------

TEST_CASE("manifest files round-trip with per-dataset mean lengths") {
    const std::string dir = "slstt_test_manifest";
    fs::create_directories(dir);
    std::vector<SampleRecord> records(3);
    records[0] = {"clipA", "SYNTH", "subj0", dir + "/a", 0, 2, 4, "deg000", ""};
    records[1] = {"clipB", "SYNTH", "subj1", dir + "/b", 0, 3, 6, "deg090", ""};
    records[2] = {"clipC", "CASME2", "subj2", dir + "/c", 10, 12, 14, "Happiness", ""};
    const std::string path = dir + "/manifest.csv";
    save_manifest(path, records);

    const Manifest m = load_manifest(path, /*verify_frames=*/false);
    REQUIRE(m.samples.size() == 3);
    CHECK(m.samples[1].sample_id == "clipB");
    CHECK(m.samples[1].frame_count() == 7);
    CHECK(m.samples[2].onset == 10);
    CHECK(m.mean_frames.at("SYNTH") == doctest::Approx(6.0));   // (5 + 7) / 2
    CHECK(m.mean_frames.at("CASME2") == doctest::Approx(5.0));
    fs::remove_all(dir);
}

TEST_CASE("manifest validation names the offending sample") {
    const std::string path = "slstt_test_bad_manifest.csv";
    auto write = [&](const std::string& body) {
        std::ofstream os(path);
        os << "sample_id,dataset,subject_id,frames_dir,onset,apex,offset,label\n" << body;
    };

    write("clipX,SYNTH,subj0,frames,5,3,8,deg000\n");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("clipX"));
    write("clipY,SYNTH,subj0,frames,0,9,8,deg000\n");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("offset precedes apex"));
    write("dup,SYNTH,subj0,frames,0,1,2,deg000\ndup,SYNTH,subj1,frames,0,1,2,deg090\n");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("duplicate sample_id"));
    write("clipZ,NOPE,subj0,frames,0,1,2,deg000\n");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("unknown dataset"));
    write("clipW,SYNTH,subj0,frames,zero,1,2,deg000\n");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("not an integer"));
    write("");
    CHECK_THROWS_WITH(load_manifest(path, false), doctest::Contains("no samples"));

    {
        std::ofstream os(path);
        os << "sample_id,dataset,subject\n";
    }
    CHECK_THROWS_AS(load_manifest(path, false), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_manifest("slstt_missing_manifest.csv", false), Error);
}

TEST_CASE("frame verification demands existing, consistent files") {
    const std::string dir = "slstt_test_frames";
    fs::create_directories(dir);
    SampleRecord r{"clipF", "SYNTH", "subj0", dir, 0, 1, 2, "deg000", ""};
    const std::string path = dir + "/manifest.csv";
    save_manifest(path, {r});

    CHECK_THROWS_WITH(load_manifest(path, true), doctest::Contains("missing frame file"));

    for (int t = 0; t < 3; ++t) {
        Image img(6, 6, 1);
        for (double& v : img.data) v = 10.0 * t;
        write_pgm(dir + "/00000" + std::to_string(t) + ".pgm", img);
    }
    CHECK(load_manifest(path, true).samples.size() == 1);
    CHECK(frame_path(r, 1).find("000001.pgm") != std::string::npos);
    CHECK(load_frame(r, 2).at(0, 0, 0) == doctest::Approx(20.0));

    write_pgm(frame_path(r, 1), Image(7, 6, 1));
    CHECK_THROWS_WITH(load_manifest(path, true), doctest::Contains("mismatched dimensions"));
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

namespace {

SynthSpec small_synth() {
    SynthSpec spec;
    spec.seed = 40;
    spec.subjects = 1;
    spec.samples_per_subject = 2;
    spec.class_directions_deg = {0.0, 180.0};
    spec.image_side = 32;
    spec.frames = 5;
    spec.peak_displacement = 3.0;
    spec.noise_std = 0.5;
    return spec;
}

}  // namespace

TEST_CASE("synthetic generation is bit-reproducible") {
    SynthSpec spec = small_synth();
    const std::string d1 = "slstt_test_synth1", d2 = "slstt_test_synth2";
    const auto r1 = synth_generate(spec, d1);
    const auto r2 = synth_generate(spec, d2);
    REQUIRE(r1.size() == 2);
    REQUIRE(r2.size() == 2);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].sample_id == r2[i].sample_id);
        CHECK(r1[i].label == r2[i].label);
        for (int t = r1[i].onset; t <= r1[i].offset; ++t)
            CHECK(slurp(frame_path(r1[i], t)) == slurp(frame_path(r2[i], t)));
    }
    // labels alternate across the direction list
    CHECK(r1[0].label == "deg000");
    CHECK(r1[1].label == "deg180");
    CHECK(load_manifest(d1 + "/manifest.csv", true).samples.size() == 2);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("zero peak displacement produces static clips with no flow") {
    SynthSpec spec = small_synth();
    spec.peak_displacement = 0.0;
    spec.noise_std = 0.0;
    const std::string dir = "slstt_test_synth_static";
    const auto records = synth_generate(spec, dir);
    const Image onset = load_frame(records[0], records[0].onset);
    const Image apex = load_frame(records[0], records[0].apex);
    CHECK(onset.data == apex.data);
    const FlowField flow = estimate_flow(onset, apex, FlowParams{});
    CHECK(flow.mean_magnitude(2) <= 1e-6);
    fs::remove_all(dir);
}

TEST_CASE("opposite class directions give anti-parallel apex flow") {
    SynthSpec spec = small_synth();
    const std::string dir = "slstt_test_synth_dirs";
    const auto records = synth_generate(spec, dir);
    std::vector<std::pair<double, double>> means;
    for (const auto& r : records) {
        const Image onset = load_frame(r, r.onset);
        const Image apex = load_frame(r, r.apex);
        const FlowField flow = estimate_flow(onset, apex, FlowParams{});
        CHECK(flow.mean_magnitude(4) > 0.05);
        means.push_back(flow.mean_vector(4));
    }
    const double dot = means[0].first * means[1].first + means[0].second * means[1].second;
    CHECK(dot < 0.0);
    fs::remove_all(dir);
}

TEST_CASE("synthetic specs are validated") {
    SynthSpec spec = small_synth();
    spec.class_directions_deg = {0.0};
    CHECK_THROWS_AS(synth_generate(spec, "slstt_test_synth_bad"), Error);
    spec = small_synth();
    spec.frames = 2;
    CHECK_THROWS_AS(synth_generate(spec, "slstt_test_synth_bad"), Error);
    spec = small_synth();
    spec.image_side = 8;
    CHECK_THROWS_AS(synth_generate(spec, "slstt_test_synth_bad"), Error);
    spec = small_synth();
    spec.peak_displacement = -1.0;
    CHECK_THROWS_AS(synth_generate(spec, "slstt_test_synth_bad"), Error);
    CHECK(small_synth().label_of(1) == "deg180");
}
