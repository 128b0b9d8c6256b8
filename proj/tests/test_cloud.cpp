// SPDX-License-Identifier: Apache-2.0

/**
 * @file test_cloud.cpp
 * @brief Word cloud construction: frequency-driven font sizing, spiral
 *        layout invariants (no overlap, in canvas, deterministic),
 *        rasterization in both render modes and the output files.
 */

#include <catch2/catch_amalgamated.hpp>

#include <sigmine/cloud.hpp>
#include <sigmine/io.hpp>

#include <filesystem>
#include <random>

using namespace sigmine;

namespace {

const std::string kGolden = SIGMINE_GOLDEN_DIR;

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "sigmine_cloud_tests";
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::string s = read_file(path);
    return {s.begin(), s.end()};
}

CloudParams small_params() {
    CloudParams p;
    p.width = 120;
    p.height = 80;
    p.max_words = 20;
    p.max_font = 24;
    p.min_font = 4;
    p.relative_scaling = 0.5;
    p.vertical_fraction = 0.1;
    p.seed = 0;
    return p;
}

std::vector<std::pair<std::string, std::int64_t>> ranked_sample() {
    return {{"fatigue", 40}, {"formule", 30}, {"vertige", 22}, {"dosage", 15},
            {"crampe", 11},  {"matin", 8},    {"soir", 6},     {"tsh", 4}};
}

bool boxes_overlap(const Placement& a, const Placement& b) {
    return a.x < b.x + b.box_w && b.x < a.x + a.box_w && a.y < b.y + b.box_h &&
           b.y < a.y + a.box_h;
}

} // namespace

TEST_CASE("font sizes follow the ratio recurrence", "[cloud]") {
    CloudParams p;
    p.max_font = 110;
    p.min_font = 4;
    p.relative_scaling = 0.5;

    // Equal frequencies keep the size: floor((0.5*1 + 0.5) * 110) = 110.
    auto sized = font_sizes({{"a", 10}, {"b", 10}, {"c", 5}}, p);
    REQUIRE(sized.size() == 3);
    CHECK(sized[0] == std::make_pair(std::string("a"), 110));
    CHECK(sized[1] == std::make_pair(std::string("b"), 110));
    // Halved frequency: floor((0.5*0.5 + 0.5) * 110) = floor(82.5) = 82.
    CHECK(sized[2] == std::make_pair(std::string("c"), 82));

    // RS = 0 ignores frequencies entirely.
    p.relative_scaling = 0.0;
    sized = font_sizes({{"a", 100}, {"b", 1}}, p);
    CHECK(sized[0].second == 110);
    CHECK(sized[1].second == 110);

    // RS = 1 scales purely by ratio.
    p.relative_scaling = 1.0;
    sized = font_sizes({{"a", 100}, {"b", 50}}, p);
    CHECK(sized[1].second == 55);
}

TEST_CASE("font sizes validate input and truncate", "[cloud]") {
    CloudParams p = small_params();
    CHECK_THROWS_AS(font_sizes({{"a", 0}}, p), domain_error);
    CHECK_THROWS_AS(font_sizes({{"a", 5}, {"b", 9}}, p), domain_error);

    // max_words cap.
    p.max_words = 2;
    auto sized = font_sizes(ranked_sample(), p);
    CHECK(sized.size() == 2);

    // min_font truncation: a steep drop ends the list early.
    p = small_params();
    p.min_font = 20;
    sized = font_sizes({{"a", 100}, {"b", 1}, {"c", 1}}, p);
    REQUIRE(sized.size() == 1); // b lands below 20 and cuts the tail
    CHECK(sized[0].second == p.max_font);

    CHECK(font_sizes({}, p).empty());
}

TEST_CASE("font sizes never increase down the ranking", "[cloud]") {
    std::mt19937_64 gen(23);
    std::uniform_int_distribution<std::int64_t> freq(1, 1000);
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_real_distribution<double> rs(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<std::pair<std::string, std::int64_t>> ranked;
        int n = len(gen);
        std::vector<std::int64_t> freqs;
        for (int i = 0; i < n; ++i) freqs.push_back(freq(gen));
        std::sort(freqs.rbegin(), freqs.rend());
        for (int i = 0; i < n; ++i)
            ranked.emplace_back("w" + std::to_string(i), freqs[i]);

        CloudParams p = small_params();
        p.relative_scaling = rs(gen);
        auto sized = font_sizes(ranked, p);
        REQUIRE(!sized.empty());
        CHECK(sized[0].second == p.max_font);
        for (std::size_t i = 0; i < sized.size(); ++i) {
            CHECK(sized[i].second >= p.min_font);
            CHECK(sized[i].second <= p.max_font);
            if (i) CHECK(sized[i].second <= sized[i - 1].second);
        }
    }
}

TEST_CASE("layout places words without overlap inside the canvas", "[cloud]") {
    CloudParams p = small_params();
    auto sized = font_sizes(ranked_sample(), p);
    Rng rng(1);
    std::vector<std::string> skipped;
    auto placements = layout(sized, p, rng, &skipped);

    CHECK(placements.size() + skipped.size() == sized.size());
    for (const auto& pl : placements) {
        CHECK(pl.x >= 0);
        CHECK(pl.y >= 0);
        CHECK(pl.x + pl.box_w <= p.width);
        CHECK(pl.y + pl.box_h <= p.height);
        CHECK(pl.box_w > 0);
        CHECK(pl.box_h > 0);
    }
    for (std::size_t i = 0; i < placements.size(); ++i)
        for (std::size_t j = i + 1; j < placements.size(); ++j)
            CHECK_FALSE(boxes_overlap(placements[i], placements[j]));

    // Word too large for the canvas in both orientations is skipped, not an
    // error.
    auto wide = font_sizes({{"motbeaucoupbeaucoupbeaucouptroplong", 10}}, p);
    Rng rng2(1);
    skipped.clear();
    auto none = layout(wide, p, rng2, &skipped);
    CHECK(none.empty());
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0] == "motbeaucoupbeaucoupbeaucouptroplong");

    // Out-of-range sizes are rejected.
    CHECK_THROWS_AS(layout({{"mot", 999}}, p, rng, nullptr), domain_error);
}

TEST_CASE("layout is deterministic in the rng stream", "[cloud]") {
    CloudParams p = small_params();
    auto sized = font_sizes(ranked_sample(), p);
    Rng r1(42), r2(42), r3(43);
    auto a = layout(sized, p, r1);
    auto b = layout(sized, p, r2);
    auto c = layout(sized, p, r3);
    REQUIRE(a.size() == b.size());
    bool same_ac = a.size() == c.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].word == b[i].word);
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].orientation == b[i].orientation);
        if (same_ac)
            same_ac = a[i].x == c[i].x && a[i].y == c[i].y;
    }
    CHECK_FALSE(same_ac); // a different seed moves something
}

TEST_CASE("rasterize box mode blackens exactly the boxes", "[cloud]") {
    CloudParams p = small_params();
    p.render_mode = RenderMode::box;
    std::vector<Placement> placements{
        {"un", 10, 2, 3, 20, 10, Orientation::horizontal},
        {"deux", 8, 50, 40, 16, 8, Orientation::horizontal},
    };
    GrayImage img = rasterize(placements, p);
    std::int64_t black = 0;
    for (std::uint8_t v : img.pixels) {
        CHECK((v == 0 || v == 255));
        if (v == 0) ++black;
    }
    CHECK(black == 20 * 10 + 16 * 8);
    CHECK(img.at(2, 3) == 0);
    CHECK(img.at(21, 12) == 0);
    CHECK(img.at(22, 3) == 255);

    // Placements outside the canvas are a hard error.
    std::vector<Placement> outside{{"x", 10, 115, 3, 20, 10, Orientation::horizontal}};
    CHECK_THROWS_AS(rasterize(outside, p), domain_error);

    // Empty placements: an all-white canvas.
    GrayImage blank = rasterize({}, p);
    for (std::uint8_t v : blank.pixels) CHECK(v == 255);
}

TEST_CASE("glyph and box modes share geometry", "[cloud]") {
    CloudParams p = small_params();
    auto sized = font_sizes(ranked_sample(), p);
    Rng r1(7), r2(7);
    auto a = layout(sized, p, r1);
    auto b = layout(sized, p, r2);
    REQUIRE(a.size() == b.size()); // rng stream identical; render mode is
                                   // not part of layout at all
    GrayImage glyph_img = rasterize(a, p);
    p.render_mode = RenderMode::box;
    GrayImage box_img = rasterize(a, p);
    // Glyph ink is a subset of box ink.
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x)
            if (glyph_img.at(x, y) == 0) CHECK(box_img.at(x, y) == 0);
}

TEST_CASE("make_cloud seeds per bucket and records skips", "[cloud]") {
    CloudParams p = small_params();
    CloudImage c1 = make_cloud(ranked_sample(), "2017-08", Resolution::month, p);
    CloudImage c2 = make_cloud(ranked_sample(), "2017-08", Resolution::month, p);
    CloudImage c3 = make_cloud(ranked_sample(), "2017-09", Resolution::month, p);
    CHECK(c1.image.pixels == c2.image.pixels);
    CHECK(c1.image.pixels != c3.image.pixels); // bucket key salts the layout
    CHECK(c1.bucket_key == "2017-08");
    CHECK(c1.placements.size() + c1.skipped.size() <= ranked_sample().size());
}

TEST_CASE("bucket_frequencies ranks per bucket", "[cloud]") {
    std::vector<TokenizedComment> comments = {
        {Date{2017, 1, 2}, "a", {"fatigue", "fatigue", "dosage"}},
        {Date{2017, 1, 20}, "b", {"fatigue", "vertige", "vertige", "vertige"}},
        {Date{2017, 3, 5}, "c", {"dosage"}},
    };
    auto ranked = bucket_frequencies(comments, Resolution::month);
    REQUIRE(ranked.size() == 2); // only non-empty buckets appear
    REQUIRE(ranked.count("2017-01") == 1);
    const auto& jan = ranked.at("2017-01");
    REQUIRE(jan.size() == 3);
    CHECK(jan[0] == std::make_pair(std::string("fatigue"), std::int64_t{3}));
    CHECK(jan[1] == std::make_pair(std::string("vertige"), std::int64_t{3}));
    CHECK(jan[2] == std::make_pair(std::string("dosage"), std::int64_t{1}));

    auto clouds = generate_bucket_clouds(comments, Resolution::month, small_params());
    REQUIRE(clouds.size() == 2);
    CHECK(clouds[0].bucket_key == "2017-01");
    CHECK(clouds[1].bucket_key == "2017-03");
}

TEST_CASE("cloud files and sidecar json", "[cloud]") {
    CloudParams p = small_params();
    std::vector<TokenizedComment> comments = {
        {Date{2017, 1, 2}, "a", {"fatigue", "fatigue", "dosage"}},
    };
    auto clouds = generate_bucket_clouds(comments, Resolution::month, p);
    std::string dir = temp_dir();
    auto paths = write_cloud_files(clouds, dir);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0] == dir + "/cloud_month_2017-01.png");

    GrayImage back = decode_png(read_bytes(paths[0]));
    CHECK(back.pixels == clouds[0].image.pixels);

    auto sidecar = nlohmann::json::parse(read_file(dir + "/cloud_month_2017-01.json"));
    CHECK(sidecar["bucket"] == "2017-01");
    CHECK(sidecar["resolution"] == "month");
    CHECK(sidecar["width"] == p.width);
    REQUIRE(sidecar["placements"].is_array());
    REQUIRE(!sidecar["placements"].empty());
    CHECK(sidecar["placements"][0]["word"] == "fatigue");
    CHECK(sidecar["placements"][0].contains("font_size"));
    CHECK(sidecar["placements"][0].contains("x"));
}

TEST_CASE("box cloud matches the golden png byte for byte", "[cloud]") {
    CloudParams p;
    p.width = 96;
    p.height = 60;
    p.max_words = 12;
    p.max_font = 36;
    p.min_font = 7;
    p.relative_scaling = 0.5;
    p.vertical_fraction = 0.0;
    p.render_mode = RenderMode::box;
    p.seed = 7;
    CloudImage cloud = make_cloud(ranked_sample(), "2017-08", Resolution::month, p);
    auto bytes = encode_png(cloud.image);
    auto golden = read_bytes(kGolden + "/cloud_box_month_2017-08.png");
    REQUIRE(bytes.size() == golden.size());
    CHECK(bytes == golden);
}
