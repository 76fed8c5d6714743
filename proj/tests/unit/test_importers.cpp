#include <doctest.h>

#include <fstream>
#include <sstream>

#include "egoact/dataset.hpp"
#include "egoact/error.hpp"
#include "egoact/importers.hpp"
#include "support/import_fixtures.hpp"
#include "support/oracles.hpp"

using namespace egoact;
using namespace egoact::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("H2O conversion") {
    const auto src = scratch_dir("h2o_src");
    const auto out = scratch_dir("h2o_out");
    write_h2o_tree(src);
    const ConversionLog log = convert_h2o(src, out);
    CHECK(log.converted == 4);
    REQUIRE(log.skipped.size() == 1);
    CHECK(log.skipped[0].find("test_2") != std::string::npos);
    CHECK(log.skipped[0].find("000003.txt") != std::string::npos);
    CHECK(slurp(out / "conversion_log.txt").find("000003.txt") != std::string::npos);

    const auto m = load_manifest(out / "manifest.json");
    CHECK(m.layout.frame_dim() == 93);
    CHECK(m.layout.num_classes == 36);
    CHECK(m.split("train").size() == 2);
    CHECK(m.split("val").size() == 1);
    CHECK(m.split("test").size() == 1);

    const auto train = load_samples(m, "train", PoseSource::GroundTruth);
    CHECK(train[0].action_label == 3);
    CHECK(train[1].action_label == 11);
    CHECK(train[0].frames.size() == 6);
    const auto& f = train[0].frames[0];
    CHECK(f.left.present);
    CHECK(f.right.present);
    CHECK(f.object.present);
    CHECK(f.object.label == 2);
    // Wrist of the right hand: (600 * 0.05 / 0.5 + 640) / 1280.
    CHECK(f.right.keypoints[0].x == doctest::Approx((600.0 * 0.05 / 0.5 + 640.0) / 1280.0).epsilon(1e-4));
    CHECK(f.right.keypoints[0].y == doctest::Approx((600.0 * 0.02 / 0.5 + 360.0) / 720.0).epsilon(1e-4));
    CHECK(load_samples(m, "val", PoseSource::GroundTruth)[0].action_label == 35);
}

TEST_CASE("H2O hands projecting off-image are marked absent") {
    const auto src = scratch_dir("h2o_off_src");
    const auto out = scratch_dir("h2o_off_out");
    write_h2o_sequence(src, "subject1/h1/0", 3, -1, true);
    write_file(src / "label_split" / "action_train.txt", "header\n1 subject1/h1/0 2 0 2 0 2\n");
    const auto log = convert_h2o(src, out);
    CHECK(log.converted == 1);
    CHECK(log.skipped.size() == 3);
    const auto m = load_manifest(out / "manifest.json");
    const auto s = load_samples(m, "train", PoseSource::GroundTruth);
    CHECK_FALSE(s[0].frames[0].right.present);
    CHECK(s[0].frames[0].left.present);
}

TEST_CASE("FPHA conversion") {
    const auto src = scratch_dir("fpha_src");
    const auto out = scratch_dir("fpha_out");
    write_fpha_tree(src);
    const ConversionLog log = convert_fpha(src, out);
    CHECK(log.converted == 3);
    REQUIRE(log.skipped.size() == 1);
    CHECK(log.skipped[0].find("missing") != std::string::npos);

    const auto m = load_manifest(out / "manifest.json");
    CHECK(m.layout.frame_dim() == 43);
    CHECK(m.layout.num_classes == 45);
    CHECK(m.class_names[3] == "pour_milk");
    CHECK(m.split("train").size() == 2);
    CHECK(m.split("test").size() == 1);
    const auto test = load_samples(m, "test", PoseSource::GroundTruth);
    CHECK(test[0].frames.size() == 6);
    CHECK(test[0].frames[0].right.present);
    CHECK_FALSE(test[0].frames[0].left.present);
    const auto seq = build_sequence(test[0], m.layout, 20, SubsampleMode::Uniform, 0);
    CHECK(seq.frame_dim == 43);
}

TEST_CASE("layout dispatch") {
    const auto src = scratch_dir("dispatch_src");
    const auto out = scratch_dir("dispatch_out");
    CHECK_THROWS_AS(convert_dataset("epic", src, out), InvalidInput);
    CHECK_THROWS_AS(convert_dataset("h2o", src, out), InvalidInput);
    CHECK_THROWS_AS(convert_dataset("fpha", src, out), InvalidInput);
}
