// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <png.h>

#include "lse/scene_io.hpp"

namespace lse {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::streamoff offset, const std::string& what) {
    throw std::runtime_error(path + ": " + what + " (byte offset " + std::to_string(offset) + ")");
}

// Reads one whitespace-delimited header token.
std::string read_token(std::istream& in) {
    std::string token;
    in >> token;
    return token;
}

}  // namespace

Image load_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pfm: cannot open " + path);

    const std::string magic = read_token(in);
    if (magic != "PF") fail_at(path, 0, "not a color PFM (header must be 'PF')");
    int width = 0, height = 0;
    double scale = 0.0;
    if (!(in >> width >> height >> scale) || width <= 0 || height <= 0) {
        fail_at(path, in.tellg(), "malformed PFM dimensions");
    }
    if (scale >= 0.0) fail_at(path, in.tellg(), "big-endian PFM unsupported (scale must be < 0)");
    in.get();  // single whitespace byte after the scale

    Image image(width, height);
    std::vector<float> row(static_cast<size_t>(width) * 3);
    // PFM stores rows bottom-up.
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) fail_at(path, in.tellg(), "truncated PFM pixel data");
        std::memcpy(&image.rgb[3 * static_cast<size_t>(y) * width], row.data(),
                    row.size() * sizeof(float));
    }
    for (float v : image.rgb) {
        if (!std::isfinite(v)) throw std::runtime_error("pfm: non-finite pixel value in " + path);
    }
    return image;
}

void save_pfm(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pfm: cannot open " + path + " for writing");
    out << "PF\n" << image.width << " " << image.height << "\n-1.0\n";
    for (int y = image.height - 1; y >= 0; --y) {
        out.write(reinterpret_cast<const char*>(&image.rgb[3 * static_cast<size_t>(y) * image.width]),
                  static_cast<std::streamsize>(static_cast<size_t>(image.width) * 3 * sizeof(float)));
    }
    if (!out) throw std::runtime_error("pfm: write failed for " + path);
}

double srgb_to_linear(double srgb) {
    return srgb <= 0.04045 ? srgb / 12.92 : std::pow((srgb + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
    linear = std::clamp(linear, 0.0, 1.0);
    return linear <= 0.0031308 ? 12.92 * linear : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

Image load_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("png: failed to read " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(width) * 3);
    Image image(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < width; ++x) {
            image.set(static_cast<int>(x), static_cast<int>(y),
                      {srgb_to_linear(row[3 * x] / 255.0), srgb_to_linear(row[3 * x + 1] / 255.0),
                       srgb_to_linear(row[3 * x + 2] / 255.0)});
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return image;
}

void save_png(const Image& image, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("png: cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png: failed to write " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Vec3 v = image.at(x, y);
            for (int c = 0; c < 3; ++c) {
                row[3 * static_cast<size_t>(x) + c] =
                    static_cast<uint8_t>(std::lround(255.0 * linear_to_srgb(v[c])));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Image load_image(const std::string& path) {
    if (has_suffix(path, ".pfm")) return load_pfm(path);
    if (has_suffix(path, ".png")) return load_png(path);
    throw std::runtime_error("image: unsupported extension for " + path + " (use .pfm or .png)");
}

void save_image(const Image& image, const std::string& path) {
    if (has_suffix(path, ".pfm")) return save_pfm(image, path);
    if (has_suffix(path, ".png")) return save_png(image, path);
    throw std::runtime_error("image: unsupported extension for " + path + " (use .pfm or .png)");
}

std::vector<uint8_t> compute_mask(const Bvh& accel, const CameraModel& camera) {
    camera.validate();
    std::vector<uint8_t> mask(static_cast<size_t>(camera.width) * camera.height, 0);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const auto hit = accel.intersect(camera.primary_ray(x + 0.5, y + 0.5));
            if (hit && !hit->backface) mask[static_cast<size_t>(y) * camera.width + x] = 1;
        }
    }
    return mask;
}

Image error_map(const Image& ref, const Image& render, double scale) {
    if (ref.width != render.width || ref.height != render.height) {
        throw std::invalid_argument("error_map: image dimension mismatch");
    }
    Image out(ref.width, ref.height);
    for (int y = 0; y < ref.height; ++y) {
        for (int x = 0; x < ref.width; ++x) {
            if (!ref.valid(x, y) || !render.valid(x, y)) {
                out.set(x, y, Vec3{});
                out.mask[static_cast<size_t>(y) * ref.width + x] = 0;
                continue;
            }
            const Vec3 d = ref.at(x, y) - render.at(x, y);
            out.set(x, y, Vec3{std::abs(d.x), std::abs(d.y), std::abs(d.z)} * scale);
        }
    }
    return out;
}

}  // namespace lse
