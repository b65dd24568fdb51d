#pragma once

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "chesscv/image.hpp"

namespace chesscv {
namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error(path + ": cannot open file");
    return f;
}

struct JpegError {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

inline void jpeg_error_longjmp(j_common_ptr cinfo) {
    std::longjmp(reinterpret_cast<JpegError*>(cinfo->err)->jump, 1);
}

inline Image from_rgb8(const std::vector<unsigned char>& rgb, int width, int height) {
    Image img(width, height, 3);
    const double inv = 1.0 / 255.0;
    for (std::size_t i = 0; i < rgb.size(); ++i) img.data[i] = rgb[i] * inv;
    return img;
}

}  // namespace detail

inline Image load_png(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng: allocation failure");
    }

    std::vector<unsigned char> rgb;
    std::vector<png_bytep> row_ptrs;
    int width = 0, height = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path + ": PNG decode error");
    }

    png_init_io(png, f.get());
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path + ": unexpected PNG row layout");
    }
    rgb.resize(static_cast<std::size_t>(width) * height * 3);
    row_ptrs.resize(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
        row_ptrs[static_cast<std::size_t>(y)] = rgb.data() + static_cast<std::size_t>(y) * width * 3;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return detail::from_rgb8(rgb, width, height);
}

inline Image load_jpeg(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    jpeg_decompress_struct cinfo;
    detail::JpegError err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = detail::jpeg_error_longjmp;

    std::vector<unsigned char> rgb;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error(path + ": JPEG decode error");
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int width = static_cast<int>(cinfo.output_width);
    const int height = static_cast<int>(cinfo.output_height);
    rgb.resize(static_cast<std::size_t>(width) * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return detail::from_rgb8(rgb, width, height);
}

/// Load a PNG or JPEG file (sniffed from magic bytes) as a 3-channel
/// image with values in [0, 1].
inline Image load_image(const std::string& path) {
    unsigned char magic[4] = {0, 0, 0, 0};
    {
        detail::FilePtr f = detail::open_file(path, "rb");
        if (std::fread(magic, 1, 4, f.get()) != 4)
            throw std::runtime_error(path + ": file too short to be an image");
    }
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        return load_png(path);
    if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return load_jpeg(path);
    throw std::runtime_error(path + ": unsupported image format (expect PNG or JPEG)");
}

/// Write an 8-bit RGB PNG; grayscale inputs are replicated across
/// channels, values clamped to [0, 1] before quantisation.
inline void save_png(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("save_png: image must have 1 or 3 channels");
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("save_png: empty image");

    std::vector<unsigned char> rgb(static_cast<std::size_t>(img.width) * img.height * 3);
    std::size_t o = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = img.at(x, y, img.channels == 3 ? c : 0);
                rgb[o++] = static_cast<unsigned char>(
                    std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            }

    detail::FilePtr f = detail::open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng: allocation failure");
    }
    std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        row_ptrs[static_cast<std::size_t>(y)] =
            rgb.data() + static_cast<std::size_t>(y) * img.width * 3;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error(path + ": PNG encode error");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace chesscv
