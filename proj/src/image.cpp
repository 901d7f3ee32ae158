// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ckfree {

namespace {

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                 suffix) == 0;
}

struct FileCloser {
    std::FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

Tensor read_png(const std::string& path) {
    FileCloser file;
    file.f = std::fopen(path.c_str(), "rb");
    if (!file.f) fail("cannot open image", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("libpng allocation failed", path);
    }
    // Buffers live outside the setjmp scope so a libpng longjmp cannot skip
    // their construction.
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("corrupt or unreadable PNG", path);
    }

    png_init_io(png, file.f);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const std::size_t width = png_get_image_width(png, info);
    const std::size_t height = png_get_image_height(png, info);
    const std::size_t channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("unsupported PNG channel layout", path);
    }

    pixels.resize(width * height * channels);
    rows.resize(height);
    for (std::size_t y = 0; y < height; ++y) rows[y] = pixels.data() + y * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor out({1, channels, height, width});
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x)
                out.at4(0, c, y, x) = pixels[(y * width + x) * channels + c] / 255.0;
    return out;
}

// Reads one PGM header token, skipping whitespace and '#' comment lines.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

Tensor read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open image", path);
    if (pgm_token(in) != "P5") fail("not a binary PGM (P5)", path);
    std::size_t width = 0, height = 0;
    int maxval = 0;
    try {
        width = std::stoul(pgm_token(in));
        height = std::stoul(pgm_token(in));
        maxval = std::stoi(pgm_token(in));
    } catch (const std::exception&) {
        fail("malformed PGM header", path);
    }
    if (width == 0 || height == 0 || maxval != 255) fail("unsupported PGM geometry", path);

    std::vector<unsigned char> pixels(width * height);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size()) fail("truncated PGM data", path);

    Tensor out({1, 1, height, width});
    for (std::size_t i = 0; i < pixels.size(); ++i) out[i] = pixels[i] / 255.0;
    return out;
}

unsigned char quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

void write_png(const std::string& path, const Tensor& img) {
    const std::size_t channels = img.dim(1);
    const std::size_t height = img.dim(2);
    const std::size_t width = img.dim(3);

    FileCloser file;
    file.f = std::fopen(path.c_str(), "wb");
    if (!file.f) fail("cannot open image for writing", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail("libpng allocation failed", path);
    }
    std::vector<png_byte> pixels(width * height * channels);
    std::vector<png_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail("PNG write failed", path);
    }

    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x)
                pixels[(y * width + x) * channels + c] = quantize(img.at4(0, c, y, x));
    for (std::size_t y = 0; y < height; ++y) rows[y] = pixels.data() + y * width * channels;

    png_init_io(png, file.f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_pgm(const std::string& path, const Tensor& img) {
    const std::size_t height = img.dim(2);
    const std::size_t width = img.dim(3);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open image for writing", path);
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> row(width);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) row[x] = quantize(img.at4(0, 0, y, x));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(width));
    }
    if (!out) fail("PGM write failed", path);
}

}  // namespace

Tensor read_image(const std::string& path) {
    if (has_suffix(path, ".pgm")) return read_pgm(path);
    return read_png(path);
}

void write_image(const std::string& path, const Tensor& img) {
    if (img.rank() != 4 || img.dim(0) != 1 || (img.dim(1) != 1 && img.dim(1) != 3))
        throw ShapeError("write_image expects a (1,1,H,W) or (1,3,H,W) tensor; got " +
                         shape_to_string(img.shape()));
    if (has_suffix(path, ".pgm")) {
        if (img.dim(1) != 1) throw ShapeError("PGM output supports one channel only");
        write_pgm(path, img);
    } else {
        write_png(path, img);
    }
}

Tensor to_luminance(const Tensor& img) {
    if (img.rank() != 4 || (img.dim(1) != 1 && img.dim(1) != 3))
        throw ShapeError("to_luminance expects (B,1,H,W) or (B,3,H,W); got " +
                         shape_to_string(img.shape()));
    if (img.dim(1) == 1) return img;

    const std::size_t B = img.dim(0), H = img.dim(2), W = img.dim(3);
    Tensor y({B, 1, H, W});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t yy = 0; yy < H; ++yy)
            for (std::size_t xx = 0; xx < W; ++xx)
                y.at4(b, 0, yy, xx) = 0.299 * img.at4(b, 0, yy, xx) +
                                      0.587 * img.at4(b, 1, yy, xx) +
                                      0.114 * img.at4(b, 2, yy, xx);
    return y;
}

}  // namespace ckfree
