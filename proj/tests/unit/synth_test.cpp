#include <gtest/gtest.h>

#include <sstream>

#include "tagmine/synth.hpp"
#include "tagmine/temporal.hpp"

using namespace tagmine;

namespace {

std::string dump(const SyntheticCorpus& s) {
    std::ostringstream out;
    s.write_corpus(out);
    s.write_truth(out);
    s.write_faces(out);
    s.write_follows(out);
    s.write_nodes(out);
    return out.str();
}

}  // namespace

TEST(Apportion, LargestRemainder) {
    std::vector<double> w{0.72, 0.14, 0.13};
    EXPECT_EQ(apportion(1000, w), (std::vector<std::size_t>{727, 142, 131}));
    std::vector<double> even{1, 1, 1};
    EXPECT_EQ(apportion(4, even), (std::vector<std::size_t>{2, 1, 1}));
    std::vector<double> none{0, 0};
    EXPECT_EQ(apportion(5, none), (std::vector<std::size_t>{0, 0}));
}

TEST(Apportion, SumsToN) {
    Rng rng(9);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> w(1 + rng.integer(0, 7));
        for (auto& x : w) x = rng.uniform();
        const auto n = static_cast<std::size_t>(rng.integer(0, 5000));
        std::size_t sum = 0;
        for (auto c : apportion(n, w)) sum += c;
        EXPECT_EQ(sum, n);
    }
}

TEST(Rng, IntegerStaysInRange) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        auto v = rng.integer(-3, 4);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 4);
    }
}

TEST(Generator, SameSeedSameBytes) {
    GeneratorSpec spec;
    spec.decoy_users = 30;
    spec.clean_users = 20;
    spec.tainted_probe_users = 5;
    spec.duplicates = 10;
    spec.geo.geotag_fraction = 0.3;
    spec.geo.noise_weight = 1.0;
    spec.network = NetworkSpec{};
    EXPECT_EQ(dump(generate_synthetic(spec, 77)), dump(generate_synthetic(spec, 77)));
    EXPECT_NE(dump(generate_synthetic(spec, 77)), dump(generate_synthetic(spec, 78)));
}

TEST(Generator, PointMassHour) {
    GeneratorSpec spec;
    spec.drug_users = 20;
    spec.hour_weights.fill(0.0);
    spec.hour_weights[16] = 1.0;
    auto data = generate_synthetic(spec, 3);
    for (const auto& p : data.emitted) EXPECT_EQ(hour_of_day(p.created_at), 16) << p.media_id;
}

TEST(Generator, ClassMixtureAtTenThousandPosts) {
    GeneratorSpec spec;
    spec.drug_users = 100;
    spec.drug_posts_per_user = 100;
    auto data = generate_synthetic(spec, 11);
    std::map<Category, double> n;
    double drug = 0;
    for (const auto& t : data.truth)
        if (t.is_drug) {
            ++drug;
            ++n[*t.drug_class];
        }
    ASSERT_EQ(drug, 10000);
    EXPECT_NEAR(n[Category::weed] / drug, 0.72 / 0.99, 0.02);
    EXPECT_NEAR(n[Category::pills] / drug, 0.14 / 0.99, 0.02);
    EXPECT_NEAR(n[Category::syrup] / drug, 0.13 / 0.99, 0.02);
}

TEST(Generator, DuplicatesAreExtraEmissions) {
    GeneratorSpec spec;
    spec.drug_users = 10;
    spec.duplicates = 25;
    auto data = generate_synthetic(spec, 5);
    EXPECT_EQ(data.planted_duplicates, 25u);
    EXPECT_EQ(data.emitted.size(), data.truth.size() + 25);
}

TEST(GeneratorSpec, Validation) {
    GeneratorSpec spec;
    spec.class_weights = {{Category::weed, 0.72}, {Category::pills, 0.14}, {Category::syrup, 0.13}};
    EXPECT_THROW(generate_synthetic(spec, 1), ConfigError);

    GeneratorSpec decoy;
    decoy.decoy_vocabulary = {"kush"};
    EXPECT_THROW(generate_synthetic(decoy, 1), ConfigError);

    GeneratorSpec slang;
    slang.slang = SlangSpec{"kush", "weedporn"};
    EXPECT_THROW(generate_synthetic(slang, 1), ConfigError);

    GeneratorSpec weeks;
    weeks.weeks = 0;
    EXPECT_THROW(generate_synthetic(weeks, 1), ConfigError);
}

TEST(GeneratorSpec, JsonRoundTrip) {
    GeneratorSpec spec;
    spec.decoy_users = 12;
    spec.hour_weights[21] = 5.0;
    spec.hour_weights_by_class[Category::syrup] = GeneratorSpec::uniform_hours();
    spec.slang = SlangSpec{"newslang", "kush", 0.3, 4};
    spec.geo.hotspots.push_back({{34.05, -118.25}, 50.0, 2.0});
    spec.network = NetworkSpec{};
    auto j = spec.to_json();
    EXPECT_EQ(GeneratorSpec::from_json(j).to_json(), j);
}
