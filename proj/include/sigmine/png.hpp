// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <zlib.h>

#include "sigmine/error.hpp"

namespace sigmine {

/// 8-bit grayscale raster, row-major, 0 = ink, 255 = background.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // width * height

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    void set(int x, int y, std::uint8_t v) {
        pixels[static_cast<std::size_t>(y) * width + x] = v;
    }
};

inline GrayImage make_image(int width, int height, std::uint8_t fill = 255) {
    if (width < 1 || height < 1) throw domain_error("image dimensions must be positive");
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
    return img;
}

namespace detail {

inline void png_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline std::uint32_t png_rd32(const std::vector<unsigned char>& b, std::size_t pos) {
    return (static_cast<std::uint32_t>(b[pos]) << 24) | (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
           (static_cast<std::uint32_t>(b[pos + 2]) << 8) | static_cast<std::uint32_t>(b[pos + 3]);
}

inline void png_chunk(std::vector<unsigned char>& out, const char type[4],
                      const std::vector<unsigned char>& data) {
    png_be32(out, static_cast<std::uint32_t>(data.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size())));
    png_be32(out, crc);
}

inline int png_paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = p > a ? p - a : a - p;
    int pb = p > b ? p - b : b - p;
    int pc = p > c ? p - c : c - p;
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace detail

/// Encodes 8-bit grayscale PNG (color type 0, no interlace, filter 0 on
/// every scanline, fixed zlib level) so equal pixels give equal bytes.
inline std::vector<unsigned char> encode_png(const GrayImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw domain_error("encode_png: malformed image");

    std::vector<unsigned char> out = {137, 'P', 'N', 'G', 13, 10, 26, 10};

    std::vector<unsigned char> ihdr;
    detail::png_be32(ihdr, static_cast<std::uint32_t>(img.width));
    detail::png_be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // grayscale
    ihdr.push_back(0); // deflate
    ihdr.push_back(0); // adaptive filtering
    ihdr.push_back(0); // no interlace
    detail::png_chunk(out, "IHDR", ihdr);

    std::vector<unsigned char> raw;
    raw.reserve(static_cast<std::size_t>(img.height) * (img.width + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0); // filter type None
        const std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        raw.insert(raw.end(), row, row + img.width);
    }

    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(bound);
    if (::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw io_error("encode_png: deflate failed");
    compressed.resize(bound);
    detail::png_chunk(out, "IDAT", compressed);

    detail::png_chunk(out, "IEND", {});
    return out;
}

/// Decodes the subset this project writes: 8-bit grayscale, non-interlaced.
/// All five scanline filters are accepted so foreign files of that shape
/// load too.
inline GrayImage decode_png(const std::vector<unsigned char>& bytes) {
    static const unsigned char sig[8] = {137, 'P', 'N', 'G', 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw format_error("decode_png: not a PNG file");

    int width = 0, height = 0;
    bool saw_ihdr = false;
    std::vector<unsigned char> idat;
    std::size_t pos = 8;
    while (pos + 12 <= bytes.size()) {
        std::uint32_t len = detail::png_rd32(bytes, pos);
        if (pos + 12 + len > bytes.size()) throw format_error("decode_png: truncated chunk");
        std::string type(bytes.begin() + static_cast<std::ptrdiff_t>(pos) + 4,
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos) + 8);
        const unsigned char* data = bytes.data() + pos + 8;
        if (type == "IHDR") {
            if (len != 13) throw format_error("decode_png: bad IHDR");
            width = static_cast<int>(detail::png_rd32(bytes, pos + 8));
            height = static_cast<int>(detail::png_rd32(bytes, pos + 12));
            if (data[8] != 8 || data[9] != 0)
                throw format_error("decode_png: only 8-bit grayscale supported");
            if (data[12] != 0) throw format_error("decode_png: interlace not supported");
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || width < 1 || height < 1) throw format_error("decode_png: missing IHDR");

    std::size_t stride = static_cast<std::size_t>(width) + 1;
    std::vector<unsigned char> raw(stride * static_cast<std::size_t>(height));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (::uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw format_error("decode_png: inflate failed");

    GrayImage img = make_image(width, height);
    std::vector<std::uint8_t> prev(static_cast<std::size_t>(width), 0);
    for (int y = 0; y < height; ++y) {
        const unsigned char* line = raw.data() + static_cast<std::size_t>(y) * stride;
        unsigned char filter = line[0];
        std::uint8_t* cur = img.pixels.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            int rawv = line[1 + x];
            int a = x > 0 ? cur[x - 1] : 0;
            int b = prev[static_cast<std::size_t>(x)];
            int c = x > 0 ? prev[static_cast<std::size_t>(x) - 1] : 0;
            int v;
            switch (filter) {
                case 0: v = rawv; break;
                case 1: v = rawv + a; break;
                case 2: v = rawv + b; break;
                case 3: v = rawv + (a + b) / 2; break;
                case 4: v = rawv + detail::png_paeth(a, b, c); break;
                default: throw format_error("decode_png: unknown filter type");
            }
            cur[x] = static_cast<std::uint8_t>(v & 0xFF);
        }
        std::memcpy(prev.data(), cur, static_cast<std::size_t>(width));
    }
    return img;
}

} // namespace sigmine
