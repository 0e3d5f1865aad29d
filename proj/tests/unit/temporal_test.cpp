#include <gtest/gtest.h>

#include <ctime>
#include <random>

#include "helpers.hpp"
#include "tagmine/synth.hpp"
#include "tagmine/temporal.hpp"

using namespace tagmine;
using testing_util::post;

namespace {

TimeHistogram from_bins(std::vector<std::uint64_t> bins) {
    TimeHistogram h(bins.size() == 24 ? TimeMode::hour : TimeMode::weekday);
    h.bins = std::move(bins);
    for (auto b : h.bins) h.total += b;
    return h;
}

}  // namespace

TEST(TimeBins, EpochAnchor) {
    const std::int64_t t = 0;
    auto h = histogram_of_times(std::span<const std::int64_t>(&t, 1), TimeMode::hour);
    EXPECT_EQ(h.bins[0], 1u);
    auto w = histogram_of_times(std::span<const std::int64_t>(&t, 1), TimeMode::weekday);
    // Monday = 0, so Thursday 1970-01-01 is bin 3.
    EXPECT_EQ(w.bins[3], 1u);
    EXPECT_EQ(w.total, 1u);
}

TEST(TimeBins, AgreesWithGmtime) {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<std::int64_t> when(-2'000'000'000, 4'000'000'000);
    for (int i = 0; i < 5000; ++i) {
        const std::int64_t t = when(gen);
        const std::time_t tt = static_cast<std::time_t>(t);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        ASSERT_EQ(hour_of_day(t), tm.tm_hour) << t;
        ASSERT_EQ(day_of_week(t), (tm.tm_wday + 6) % 7) << t;
    }
}

TEST(Histogram, ClassFilterUsesAttribution) {
    const Lexicon lex = shipped_lexicon();
    std::vector<Post> posts{post("a", "u", {"kush", "weedporn"}, 16 * 3600),
                            post("b", "u", {"kush", "xanaxbars"}, 21 * 3600),
                            post("c", "u", {"sizzurp", "doublecup"}, 21 * 3600)};
    auto all = histogram(posts, TimeMode::hour, std::nullopt, lex);
    EXPECT_EQ(all.total, 3u);
    auto weed = histogram(posts, TimeMode::hour, Category::weed, lex);
    EXPECT_EQ(weed.total, 2u);
    EXPECT_EQ(weed.bins[16], 1u);
    EXPECT_EQ(weed.bins[21], 1u);
    auto pills = histogram(posts, TimeMode::hour, Category::pills, lex);
    EXPECT_EQ(pills.total, 1u);
    EXPECT_EQ(pills.to_json()["class"], "pills");
}

// 5% of 1,000 is only 1.6 binomial standard deviations, so the bound is
// checked at 240,000 draws where 5% of the mean is about 5 sigma.
TEST(Histogram, UniformHoursConcentrate) {
    Rng rng(17);
    std::vector<std::int64_t> times;
    for (int i = 0; i < 240'000; ++i) times.push_back(rng.integer(1420070400, 1420070400 + 365 * 86400 - 1));
    auto h = histogram_of_times(times, TimeMode::hour);
    for (auto b : h.bins) {
        EXPECT_GT(b, 9500u);
        EXPECT_LT(b, 10500u);
    }
}

TEST(DetectPeaks, Examples) {
    EXPECT_TRUE(detect_peaks(from_bins(std::vector<std::uint64_t>(24, 7))).empty());
    std::vector<std::uint64_t> point(24, 0);
    point[4] = 9;
    EXPECT_EQ(detect_peaks(from_bins(point)), std::vector<int>{4});
    EXPECT_TRUE(detect_peaks(from_bins(std::vector<std::uint64_t>(24, 0))).empty());
}

TEST(DetectPeaks, OrderedByHeight) {
    std::vector<std::uint64_t> h(24, 10);
    h[16] = 40;
    h[21] = 60;
    EXPECT_EQ(detect_peaks(from_bins(h)), (std::vector<int>{21, 16}));
}

TEST(DetectPeaks, WrapsAroundMidnight) {
    std::vector<std::uint64_t> h(24, 10);
    h[23] = 50;
    h[0] = 30;
    EXPECT_EQ(detect_peaks(from_bins(h)), std::vector<int>{23});
}

TEST(DetectPeaks, PlateauReportsSmallestIndex) {
    std::vector<std::uint64_t> h(24, 1);
    h[7] = h[8] = h[9] = 50;
    EXPECT_EQ(detect_peaks(from_bins(h)), std::vector<int>{7});
    std::vector<std::uint64_t> wrap(24, 1);
    wrap[23] = wrap[0] = 50;
    EXPECT_EQ(detect_peaks(from_bins(wrap)), std::vector<int>{0});
}

TEST(DetectPeaks, ProminenceThreshold) {
    // Bump of 3 over a total of ~241: prominence 3 is above 1% but below 2%.
    std::vector<std::uint64_t> h(24, 10);
    h[5] = 13;
    EXPECT_TRUE(detect_peaks(from_bins(h), 0.02).empty());
    EXPECT_EQ(detect_peaks(from_bins(h), 0.01), std::vector<int>{5});
    // A shoulder on a larger peak is measured against its own col, not the floor.
    std::vector<std::uint64_t> s(24, 0);
    s[10] = 100;
    s[11] = 60;
    s[12] = 62;
    EXPECT_EQ(detect_peaks(from_bins(s), 0.02), std::vector<int>{10});
    EXPECT_EQ(detect_peaks(from_bins(s), 0.005), (std::vector<int>{10, 12}));
}

// Property: reported peaks are strict local maxima and rotating a
// plateau-free histogram rotates its peaks.
TEST(DetectPeaks, RotationEquivariant) {
    std::mt19937_64 gen(11);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::uint64_t> h(24);
        for (std::size_t i = 0; i < 24; ++i) h[i] = gen() % 1000 * 24 + i;  // distinct values
        auto peaks = detect_peaks(from_bins(h), 0.01);
        for (int p : peaks) {
            auto i = static_cast<std::size_t>(p);
            EXPECT_GT(h[i], h[(i + 23) % 24]);
            EXPECT_GT(h[i], h[(i + 1) % 24]);
        }
        const std::size_t shift = gen() % 24;
        std::vector<std::uint64_t> r(24);
        for (std::size_t i = 0; i < 24; ++i) r[(i + shift) % 24] = h[i];
        std::vector<int> expect;
        for (int p : peaks) expect.push_back(static_cast<int>((static_cast<std::size_t>(p) + shift) % 24));
        EXPECT_EQ(detect_peaks(from_bins(r), 0.01), expect);
    }
}

TEST(Divergence, ClosedForms) {
    std::vector<std::uint64_t> flat(24, 5);
    EXPECT_NEAR(divergence_from_baseline(from_bins(flat), BaselineProfile::uniform()), 0.0, 1e-12);
    std::vector<std::uint64_t> point(24, 0);
    point[3] = 10;
    EXPECT_NEAR(divergence_from_baseline(from_bins(point), BaselineProfile::uniform()), 1.0 - 1.0 / 24.0, 1e-12);
    EXPECT_THROW(divergence_from_baseline(from_bins(std::vector<std::uint64_t>(24, 0)), BaselineProfile::uniform()),
                 ConfigError);
    EXPECT_THROW(divergence_from_baseline(from_bins(std::vector<std::uint64_t>(7, 1)), BaselineProfile::uniform()),
                 ConfigError);
}

TEST(Divergence, ProportionalToNonUniformBaseline) {
    std::vector<double> w(24, 0.0);
    w[0] = 0.25;
    w[12] = 0.75;
    std::vector<std::uint64_t> h(24, 0);
    h[0] = 100;
    h[12] = 300;
    EXPECT_NEAR(divergence_from_baseline(from_bins(h), BaselineProfile::from_weights(w)), 0.0, 1e-12);
    w[0] = 0.3;
    EXPECT_THROW(BaselineProfile::from_weights(w), ConfigError);
}

TEST(Synthetic, PlantedBimodalHours) {
    GeneratorSpec spec;
    spec.drug_users = 100;
    spec.hour_weights.fill(1.0);
    spec.hour_weights[16] = 6.0;
    spec.hour_weights[21] = 5.0;
    auto data = generate_synthetic(spec, 8);
    const Lexicon lex = shipped_lexicon();
    std::vector<Post> drug;
    for (std::size_t i = 0; i < data.truth.size(); ++i)
        if (data.truth[i].is_drug) drug.push_back(data.emitted[i]);
    ASSERT_EQ(drug.size(), 2000u);
    auto h = histogram(drug, TimeMode::hour, std::nullopt, lex);
    EXPECT_EQ(detect_peaks(h), (std::vector<int>{16, 21}));
    EXPECT_GT(divergence_from_baseline(h, BaselineProfile::uniform()), 0.1);
}
