// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmine/date.hpp"
#include "sigmine/error.hpp"
#include "sigmine/font.hpp"
#include "sigmine/io.hpp"
#include "sigmine/png.hpp"
#include "sigmine/preprocess.hpp"
#include "sigmine/rng.hpp"

namespace sigmine {

enum class RenderMode { glyph, box };

struct CloudParams {
    int width = 800;
    int height = 500;
    int max_words = 200;
    int max_font = 110;
    int min_font = 4;
    double relative_scaling = 0.5;
    double vertical_fraction = 0.1; // 0 for orientation-free geometry studies
    std::uint64_t seed = 0;
    RenderMode render_mode = RenderMode::glyph;

    void validate() const {
        if (width < 1 || height < 1) throw domain_error("cloud params: canvas must be positive");
        if (max_words < 1) throw domain_error("cloud params: max_words < 1");
        if (min_font < 1 || min_font > max_font)
            throw domain_error("cloud params: need 1 <= min_font <= max_font");
        if (relative_scaling < 0.0 || relative_scaling > 1.0)
            throw domain_error("cloud params: relative_scaling outside [0, 1]");
        if (vertical_fraction < 0.0 || vertical_fraction > 1.0)
            throw domain_error("cloud params: vertical_fraction outside [0, 1]");
    }
};

struct Placement {
    std::string word;
    int font_size = 0;
    int x = 0; // bounding-box top-left
    int y = 0;
    int box_w = 0;
    int box_h = 0;
    Orientation orientation = Orientation::horizontal;
};

struct CloudImage {
    GrayImage image;
    std::vector<Placement> placements;
    std::vector<std::string> skipped; // words with no collision-free position
    std::string bucket_key;
    Resolution resolution = Resolution::day;
};

/// Font sizes from ranked frequencies. The top word gets max_font; each
/// later word scales the previous size by RS * (freq / prev_freq) + (1-RS),
/// floored to whole pixels. The list truncates at the first word under
/// min_font and never exceeds max_words.
inline std::vector<std::pair<std::string, int>> font_sizes(
    const std::vector<std::pair<std::string, std::int64_t>>& ranked_freqs,
    const CloudParams& params) {
    params.validate();
    std::vector<std::pair<std::string, int>> sized;
    std::int64_t prev_freq = 0;
    int prev_size = 0;
    for (const auto& [word, freq] : ranked_freqs) {
        if (freq <= 0) throw domain_error("font_sizes: non-positive frequency for: " + word);
        if (!sized.empty() && freq > prev_freq)
            throw domain_error("font_sizes: frequencies not sorted descending at: " + word);
        int size;
        if (sized.empty()) {
            size = params.max_font;
        } else {
            const double ratio = static_cast<double>(freq) / static_cast<double>(prev_freq);
            size = static_cast<int>(std::floor(
                (params.relative_scaling * ratio + (1.0 - params.relative_scaling)) * prev_size));
        }
        if (size < params.min_font) break;
        sized.emplace_back(word, size);
        prev_freq = freq;
        prev_size = size;
        if (static_cast<int>(sized.size()) >= params.max_words) break;
    }
    return sized;
}

namespace detail {

/// Row-major bitmask over the canvas. Collision tests and marks use the
/// placement's bounding rectangle padded by one pixel, so layout geometry
/// is identical whatever gets rasterized inside the box.
class OccupancyMask {
public:
    OccupancyMask(int width, int height)
        : width_(width), height_(height), words_per_row_((width + 63) / 64),
          bits_(static_cast<std::size_t>(words_per_row_) * height, 0) {}

    bool box_free(int x, int y, int w, int h) const {
        const int x0 = std::max(0, x - 1);
        const int y0 = std::max(0, y - 1);
        const int x1 = std::min(width_, x + w + 1);
        const int y1 = std::min(height_, y + h + 1);
        for (int row = y0; row < y1; ++row)
            for (int col = x0; col < x1;) {
                const int word = col / 64;
                const int bit = col % 64;
                const int span = std::min(64 - bit, x1 - col);
                const std::uint64_t mask = span == 64 ? ~0ULL : (((1ULL << span) - 1) << bit);
                if (bits_[static_cast<std::size_t>(row) * words_per_row_ + word] & mask) return false;
                col += span;
            }
        return true;
    }

    void mark_box(int x, int y, int w, int h) {
        const int x0 = std::max(0, x - 1);
        const int y0 = std::max(0, y - 1);
        const int x1 = std::min(width_, x + w + 1);
        const int y1 = std::min(height_, y + h + 1);
        for (int row = y0; row < y1; ++row)
            for (int col = x0; col < x1;) {
                const int word = col / 64;
                const int bit = col % 64;
                const int span = std::min(64 - bit, x1 - col);
                const std::uint64_t mask = span == 64 ? ~0ULL : (((1ULL << span) - 1) << bit);
                bits_[static_cast<std::size_t>(row) * words_per_row_ + word] |= mask;
                col += span;
            }
    }

private:
    int width_;
    int height_;
    int words_per_row_;
    std::vector<std::uint64_t> bits_;
};

} // namespace detail

/// Places words, largest first, by walking an Archimedean spiral from a
/// seeded random start until the padded bounding box is collision-free. A
/// word whose drawn orientation cannot fit the canvas falls back to the
/// other one; a word with no free position is skipped and recorded.
inline std::vector<Placement> layout(const std::vector<std::pair<std::string, int>>& sized_words,
                                     const CloudParams& params, Rng& rng,
                                     std::vector<std::string>* skipped = nullptr) {
    params.validate();
    detail::OccupancyMask mask(params.width, params.height);
    std::vector<Placement> placements;
    const double diag = std::sqrt(static_cast<double>(params.width) * params.width +
                                  static_cast<double>(params.height) * params.height);
    const double spiral_a = 4.0 / (2.0 * M_PI); // 4 px between revolutions
    for (const auto& [word, size] : sized_words) {
        if (size < params.min_font || size > params.max_font)
            throw domain_error("layout: size outside [min_font, max_font] for: " + word);
        Orientation orient = rng.uniform() < params.vertical_fraction ? Orientation::vertical
                                                                      : Orientation::horizontal;
        auto [w, h] = text_extent(word, size, orient);
        if (w > params.width || h > params.height) {
            orient = orient == Orientation::vertical ? Orientation::horizontal : Orientation::vertical;
            std::tie(w, h) = text_extent(word, size, orient);
        }
        if (w > params.width || h > params.height) {
            if (skipped) skipped->push_back(word);
            continue;
        }
        const double sx = static_cast<double>(rng.uniform_int(0, params.width - 1));
        const double sy = static_cast<double>(rng.uniform_int(0, params.height - 1));
        bool placed = false;
        double theta = 0.0;
        while (true) {
            const double r = spiral_a * theta;
            if (r > diag) break;
            const int x = static_cast<int>(std::lround(sx + r * std::cos(theta))) - w / 2;
            const int y = static_cast<int>(std::lround(sy + r * std::sin(theta))) - h / 2;
            if (x >= 0 && y >= 0 && x + w <= params.width && y + h <= params.height &&
                mask.box_free(x, y, w, h)) {
                mask.mark_box(x, y, w, h);
                placements.push_back(Placement{word, size, x, y, w, h, orient});
                placed = true;
                break;
            }
            theta += 2.0 / std::max(r, 2.0); // roughly 2 px along the arc
        }
        if (!placed && skipped) skipped->push_back(word);
    }
    return placements;
}

/// Renders placements onto a white canvas: glyph mode draws the bitmap
/// font, box mode fills the text extent solid. Both read the same
/// placements, so the geometry is render-mode independent.
inline GrayImage rasterize(const std::vector<Placement>& placements, const CloudParams& params) {
    params.validate();
    GrayImage img = make_image(params.width, params.height, 255);
    for (const auto& p : placements) {
        if (p.x < 0 || p.y < 0 || p.x + p.box_w > params.width || p.y + p.box_h > params.height)
            throw domain_error("rasterize: placement outside canvas: " + p.word);
        if (params.render_mode == RenderMode::box) {
            for (int y = p.y; y < p.y + p.box_h; ++y)
                for (int x = p.x; x < p.x + p.box_w; ++x) img.set(x, y, 0);
        } else {
            render_text(img, p.word, p.x, p.y, p.font_size, p.orientation);
        }
    }
    return img;
}

/// Builds one cloud from ranked (word, frequency) pairs. The layout stream
/// is seeded from (params.seed, bucket_key) so a bucket's cloud does not
/// depend on which other buckets exist.
inline CloudImage make_cloud(const std::vector<std::pair<std::string, std::int64_t>>& ranked_freqs,
                             const std::string& bucket, Resolution res, const CloudParams& params) {
    CloudImage cloud;
    cloud.bucket_key = bucket;
    cloud.resolution = res;
    auto sized = font_sizes(ranked_freqs, params);
    Rng rng(mix_seed(params.seed, hash_str(bucket)));
    cloud.placements = layout(sized, params, rng, &cloud.skipped);
    cloud.image = rasterize(cloud.placements, params);
    return cloud;
}

/// Ranked per-bucket word frequencies (count descending, then word), one
/// entry per non-empty bucket.
inline std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> bucket_frequencies(
    const std::vector<TokenizedComment>& comments, Resolution res) {
    std::map<std::string, std::unordered_map<std::string, std::int64_t>> counts;
    for (const auto& c : comments) {
        auto& bucket = counts[bucket_key(c.timestamp, res)];
        for (const auto& t : c.tokens) ++bucket[t];
    }
    std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> ranked;
    for (auto& [bucket, words] : counts) {
        if (words.empty()) continue;
        std::vector<std::pair<std::string, std::int64_t>> r(words.begin(), words.end());
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        ranked[bucket] = std::move(r);
    }
    return ranked;
}

/// One cloud per non-empty bucket, in bucket order.
inline std::vector<CloudImage> generate_bucket_clouds(const std::vector<TokenizedComment>& comments,
                                                      Resolution res, const CloudParams& params) {
    params.validate();
    std::vector<CloudImage> clouds;
    for (const auto& [bucket, ranked] : bucket_frequencies(comments, res))
        clouds.push_back(make_cloud(ranked, bucket, res, params));
    return clouds;
}

inline std::string cloud_file_stem(const CloudImage& cloud) {
    return std::string("cloud_") + resolution_name(cloud.resolution) + "_" + cloud.bucket_key;
}

inline nlohmann::json cloud_sidecar_json(const CloudImage& cloud) {
    nlohmann::json placements = nlohmann::json::array();
    for (const auto& p : cloud.placements) {
        placements.push_back({{"word", p.word},
                              {"font_size", p.font_size},
                              {"x", p.x},
                              {"y", p.y},
                              {"width", p.box_w},
                              {"height", p.box_h},
                              {"orientation", p.orientation == Orientation::vertical ? "vertical"
                                                                                     : "horizontal"}});
    }
    return nlohmann::json{{"bucket", cloud.bucket_key},
                          {"resolution", resolution_name(cloud.resolution)},
                          {"width", cloud.image.width},
                          {"height", cloud.image.height},
                          {"placements", placements},
                          {"skipped", cloud.skipped}};
}

/// Writes `<stem>.png` plus a `<stem>.json` sidecar with the placements;
/// returns the PNG paths.
inline std::vector<std::string> write_cloud_files(const std::vector<CloudImage>& clouds,
                                                  const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& cloud : clouds) {
        const std::string stem = dir + "/" + cloud_file_stem(cloud);
        write_file(stem + ".png", encode_png(cloud.image));
        write_file(stem + ".json", cloud_sidecar_json(cloud).dump(2) + "\n");
        paths.push_back(stem + ".png");
    }
    return paths;
}

} // namespace sigmine
