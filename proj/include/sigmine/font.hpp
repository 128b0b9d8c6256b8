// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <utility>

#include "sigmine/error.hpp"
#include "sigmine/png.hpp"

namespace sigmine {

enum class Orientation { horizontal, vertical };

namespace detail {

// Hand-drawn 5x10 bitmap lowercase alphabet: baseline at row 7, two
// descender rows below. Scaling is nearest-neighbor, so shapes hold up from
// tiny sizes to headline sizes without an external font file.
inline const std::array<std::array<const char*, 10>, 26>& glyph_table() {
    static const std::array<std::array<const char*, 10>, 26> table = {{
        // a
        {".....", ".....", ".###.", "....#", ".####", "#...#", "#...#", ".####", ".....", "....."},
        // b
        {"#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#", "####.", ".....", "....."},
        // c
        {".....", ".....", ".####", "#....", "#....", "#....", "#....", ".####", ".....", "....."},
        // d
        {"....#", "....#", ".####", "#...#", "#...#", "#...#", "#...#", ".####", ".....", "....."},
        // e
        {".....", ".....", ".###.", "#...#", "#####", "#....", "#....", ".####", ".....", "....."},
        // f
        {"..##.", ".#...", "####.", ".#...", ".#...", ".#...", ".#...", ".#...", ".....", "....."},
        // g
        {".....", ".....", ".####", "#...#", "#...#", "#...#", "#...#", ".####", "....#", ".###."},
        // h
        {"#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#", "#...#", ".....", "....."},
        // i
        {".....", "..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", ".....", "....."},
        // j
        {".....", "...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},
        // k
        {"#....", "#....", "#...#", "#..#.", "###..", "#.#..", "#..#.", "#...#", ".....", "....."},
        // l
        {".##..", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."},
        // m
        {".....", ".....", "##.##", "#.#.#", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."},
        // n
        {".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#", "#...#", ".....", "....."},
        // o
        {".....", ".....", ".###.", "#...#", "#...#", "#...#", "#...#", ".###.", ".....", "....."},
        // p
        {".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#", "####.", "#....", "#...."},
        // q
        {".....", ".....", ".####", "#...#", "#...#", "#...#", "#...#", ".####", "....#", "....#"},
        // r
        {".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", "#....", ".....", "....."},
        // s
        {".....", ".....", ".####", "#....", ".###.", "....#", "....#", "####.", ".....", "....."},
        // t
        {".....", ".#...", "####.", ".#...", ".#...", ".#...", ".#..#", "..##.", ".....", "....."},
        // u
        {".....", ".....", "#...#", "#...#", "#...#", "#...#", "#...#", ".####", ".....", "....."},
        // v
        {".....", ".....", "#...#", "#...#", "#...#", ".#.#.", ".#.#.", "..#..", ".....", "....."},
        // w
        {".....", ".....", "#.#.#", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."},
        // x
        {".....", ".....", "#...#", ".#.#.", "..#..", "..#..", ".#.#.", "#...#", ".....", "....."},
        // y
        {".....", ".....", "#...#", "#...#", "#...#", "#...#", "#...#", ".####", "....#", ".###."},
        // z
        {".....", ".....", "#####", "...#.", "..#..", ".#...", "#....", "#####", ".....", "....."},
    }};
    return table;
}

constexpr int kGlyphCols = 5;
constexpr int kGlyphRows = 10;
constexpr int kGlyphCell = 6; // columns per character cell, spacing included

inline bool glyph_pixel(char ch, int row, int col) {
    if (ch < 'a' || ch > 'z') return false;
    if (col >= kGlyphCols) return false; // spacing column
    return glyph_table()[static_cast<std::size_t>(ch - 'a')][static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] == '#';
}

} // namespace detail

/// Horizontal pixels one character occupies at a font size (height in px).
inline int char_advance(int font_size) {
    if (font_size < 1) throw domain_error("char_advance: font size < 1");
    int adv = (font_size * detail::kGlyphCell + detail::kGlyphRows / 2) / detail::kGlyphRows;
    return adv < 1 ? 1 : adv;
}

/// Bounding box (width, height) of a word at a font size and orientation.
inline std::pair<int, int> text_extent(const std::string& word, int font_size,
                                       Orientation orientation) {
    if (word.empty()) throw domain_error("text_extent: empty word");
    int w = static_cast<int>(word.size()) * char_advance(font_size);
    int h = font_size;
    if (orientation == Orientation::vertical) std::swap(w, h);
    return {w, h};
}

/// Draws a word in ink (0) with its bounding box's top-left corner at
/// (x, y); the caller guarantees the box fits the canvas. Vertical text is
/// the horizontal rendering rotated a quarter turn clockwise.
inline void render_text(GrayImage& img, const std::string& word, int x, int y, int font_size,
                        Orientation orientation) {
    auto [w, h] = text_extent(word, font_size, orientation);
    if (x < 0 || y < 0 || x + w > img.width || y + h > img.height)
        throw domain_error("render_text: box outside canvas");
    const int adv = char_advance(font_size);
    const int hw = static_cast<int>(word.size()) * adv; // unrotated extent
    for (int py = 0; py < font_size; ++py) {
        const int srow = py * detail::kGlyphRows / font_size;
        for (int px = 0; px < hw; ++px) {
            const int ci = px / adv;
            const int scol = (px % adv) * detail::kGlyphCell / adv;
            if (!detail::glyph_pixel(word[static_cast<std::size_t>(ci)], srow, scol)) continue;
            if (orientation == Orientation::horizontal)
                img.set(x + px, y + py, 0);
            else
                img.set(x + (font_size - 1 - py), y + px, 0);
        }
    }
}

} // namespace sigmine
