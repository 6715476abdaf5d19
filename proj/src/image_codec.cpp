// Single-image decode/encode: PNG and JPEG via libpng/libjpeg, PGM (P5/P2)
// hand-rolled. Formats are sniffed from file signatures, not extensions.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "dyntex/frameio.hpp"

namespace dyntex::frameio {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw DataError("cannot open " + path.string());
    return f;
}

// ---- PNG ----

Frame decode_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng init failed");
    }
    std::vector<png_byte> pixels;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("undecodable file: " + path.filename().string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png); // covers gray+alpha, RGBA, and tRNS-expanded alpha
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("undecodable file: " + path.filename().string());
    }
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * height);
    row_ptrs.resize(height);
    for (std::size_t y = 0; y < height; ++y) row_ptrs[y] = pixels.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Frame frame({width, height, channels});
    for (std::size_t y = 0; y < height; ++y) {
        const png_byte* src = pixels.data() + y * rowbytes;
        double* dst = frame.data.data() + y * width * channels;
        for (std::size_t i = 0; i < width * channels; ++i) dst[i] = src[i];
    }
    return frame;
}

void encode_png(const Frame& frame, const std::vector<unsigned char>& bytes,
                const std::filesystem::path& path) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("cannot write " + path.string());
    }
    png_init_io(png, f.get());
    const int color = frame.geom.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, static_cast<png_uint_32>(frame.geom.width),
                 static_cast<png_uint_32>(frame.geom.height), 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = frame.geom.width * frame.geom.channels;
    for (std::size_t y = 0; y < frame.geom.height; ++y)
        png_write_row(png, const_cast<png_bytep>(bytes.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

Frame decode_jpeg(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DataError("undecodable file: " + path.filename().string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);

    const std::size_t width = cinfo.output_width;
    const std::size_t height = cinfo.output_height;
    const std::size_t channels = cinfo.output_components;
    if (channels != 1 && channels != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw DataError("undecodable file: " + path.filename().string());
    }
    Frame frame({width, height, channels});
    std::vector<unsigned char> row(width * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* rows[1] = {row.data()};
        jpeg_read_scanlines(&cinfo, rows, 1);
        double* dst = frame.data.data() + (cinfo.output_scanline - 1) * width * channels;
        for (std::size_t i = 0; i < width * channels; ++i) dst[i] = row[i];
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return frame;
}

// ---- PGM (P5 binary, P2 ascii) ----

int pgm_next_token(std::istream& in, std::string& token) {
    token.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token.empty() ? EOF : 0;
}

Frame decode_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string tok;
    auto next = [&]() -> const std::string& {
        if (pgm_next_token(in, tok) == EOF)
            throw DataError("undecodable file: " + path.filename().string());
        return tok;
    };
    auto next_num = [&]() -> unsigned long {
        try {
            std::size_t used = 0;
            const std::string& t = next();
            const unsigned long v = std::stoul(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("undecodable file: " + path.filename().string());
        }
    };
    const std::string magic = next();
    if (magic != "P5" && magic != "P2")
        throw DataError("undecodable file: " + path.filename().string());
    const std::size_t width = next_num();
    const std::size_t height = next_num();
    const unsigned long maxval = next_num();
    if (width == 0 || height == 0 || width > 65536 || height > 65536 || maxval == 0 ||
        maxval > 255)
        throw DataError("undecodable file: " + path.filename().string());

    Frame frame({width, height, 1});
    if (magic == "P5") {
        std::vector<unsigned char> raw(width * height);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw DataError("undecodable file: " + path.filename().string());
        for (std::size_t i = 0; i < raw.size(); ++i) frame.data[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < width * height; ++i)
            frame.data[i] = static_cast<double>(next_num());
    }
    return frame;
}

void encode_pgm(const Frame& frame, const std::vector<unsigned char>& bytes,
                const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n" << frame.geom.width << " " << frame.geom.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write " + path.string());
}

enum class Sniffed { png, jpeg, pgm, unknown };

Sniffed sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), sizeof sig);
    if (in.gcount() >= 8 && std::memcmp(sig, "\x89PNG\r\n\x1a\n", 8) == 0) return Sniffed::png;
    if (in.gcount() >= 2 && sig[0] == 0xFF && sig[1] == 0xD8) return Sniffed::jpeg;
    if (in.gcount() >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2'))
        return Sniffed::pgm;
    return Sniffed::unknown;
}

} // namespace

Frame to_grayscale(const Frame& frame) {
    if (frame.geom.channels == 1) return frame;
    Frame out({frame.geom.width, frame.geom.height, 1});
    const std::size_t pixels = frame.geom.width * frame.geom.height;
    const double* src = frame.data.data();
    for (std::size_t i = 0; i < pixels; ++i) {
        // Rec. 601 luma
        out.data[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    }
    return out;
}

Frame resize_bilinear(const Frame& frame, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0)
        throw DataError("resize: target dimensions must be positive");
    if (frame.geom.width == width && frame.geom.height == height) return frame;
    const std::size_t ch = frame.geom.channels;
    Frame out({width, height, ch});
    const double sx = static_cast<double>(frame.geom.width) / static_cast<double>(width);
    const double sy = static_cast<double>(frame.geom.height) / static_cast<double>(height);
    for (std::size_t y = 0; y < height; ++y) {
        double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(frame.geom.height - 1));
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, frame.geom.height - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(frame.geom.width - 1));
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, frame.geom.width - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < ch; ++c) {
                const double top = (1.0 - wx) * frame.at(x0, y0, c) + wx * frame.at(x1, y0, c);
                const double bot = (1.0 - wx) * frame.at(x0, y1, c) + wx * frame.at(x1, y1, c);
                out.at(x, y, c) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

Frame load_image(const std::filesystem::path& file, const LoadOptions& options) {
    Frame frame;
    switch (sniff(file)) {
        case Sniffed::png: frame = decode_png(file); break;
        case Sniffed::jpeg: frame = decode_jpeg(file); break;
        case Sniffed::pgm: frame = decode_pgm(file); break;
        case Sniffed::unknown:
            throw DataError("undecodable file: " + file.filename().string());
    }
    if (options.grayscale) frame = to_grayscale(frame);
    if (options.resize) frame = resize_bilinear(frame, options.resize->first, options.resize->second);
    return frame;
}

void save_image(const Frame& frame, const std::filesystem::path& file, ImageFormat format) {
    if (frame.geom.channels != 1 && frame.geom.channels != 3)
        throw DataError("save_image: channels must be 1 or 3");
    if (format == ImageFormat::pgm && frame.geom.channels != 1)
        throw DataError("save_image: PGM output requires a single channel");
    std::vector<unsigned char> bytes(frame.data.size());
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        const double v = std::clamp(frame.data[i], 0.0, 255.0);
        bytes[i] = static_cast<unsigned char>(std::llround(v));
    }
    if (format == ImageFormat::png)
        encode_png(frame, bytes, file);
    else
        encode_pgm(frame, bytes, file);
}

} // namespace dyntex::frameio
