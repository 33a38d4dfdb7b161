#include "dmad/dataio/png_io.hpp"

#include "dmad/core/error.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace dmad::dataio {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

PngData read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw FormatError("not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }

    PngData out;
    std::vector<png_bytep> rows;
    std::vector<png_byte> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG: " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // native little-endian samples
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (out.channels != 1 && out.channels != 3) throw FormatError("unsupported PNG channel layout: " + path.string());

    const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
    out.samples.resize(n);
    if (out.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
    }
    return out;
}

void write_png(const std::filesystem::path& path, const PngData& img) {
    if (img.channels != 1 && img.channels != 3) throw ArgumentError("write_png: channels must be 1 or 3");
    if (img.bit_depth != 8 && img.bit_depth != 16) throw ArgumentError("write_png: bit depth must be 8 or 16");
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (img.samples.size() != n) throw ShapeError("write_png: sample count mismatch");

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }

    const int bytes = img.bit_depth / 8;
    const std::size_t rowbytes = static_cast<std::size_t>(img.width) * img.channels * bytes;
    std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(img.height));
    for (std::size_t i = 0; i < n; ++i) {
        if (bytes == 2) {
            // PNG stores 16-bit samples big-endian.
            buffer[2 * i] = static_cast<png_byte>(img.samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<png_byte>(img.samples[i] & 0xff);
        } else {
            buffer[i] = static_cast<png_byte>(img.samples[i]);
        }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), img.bit_depth,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw IoError("failed flushing " + path.string());
}

}  // namespace dmad::dataio
