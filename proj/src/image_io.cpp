#include "demfi/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <regex>
#include <vector>

namespace demfi {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Tensor read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("png: cannot open '" + path + "'");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: failed to decode '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(w) * 3);
    Tensor out(1, 3, h, w);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(0, c, y, x) = static_cast<float>(row[x * 3 + c]) / 255.0f;
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const Tensor& frame, const std::string& path) {
    if (frame.n() != 1 || frame.c() != 3) {
        throw std::invalid_argument("png: frame must be 1x3xHxW, got " + frame.shape_str());
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("png: cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: failed to write '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(frame.w()), static_cast<png_uint_32>(frame.h()),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(frame.w()) * 3);
    for (std::int64_t y = 0; y < frame.h(); ++y) {
        for (std::int64_t x = 0; x < frame.w(); ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(static_cast<double>(frame.at(0, c, y, x)), 0.0, 1.0);
                row[static_cast<std::size_t>(x * 3 + c)] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

FrameSequence read_sequence(const std::string& dir, double fps) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("sequence: '" + dir + "' is not a directory");
    static const std::regex pattern(R"((\d+)\.png)");
    std::map<long, fs::path> numbered;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_search(name, m, pattern)) {
            numbered.emplace(std::stol(m[1].str()), entry.path());
        }
    }
    if (numbered.empty()) throw std::runtime_error("sequence: no numbered PNG frames in '" + dir + "'");
    long expected = numbered.begin()->first;
    FrameSequence seq;
    seq.fps = fps;
    for (const auto& [index, path] : numbered) {
        if (index != expected) {
            throw std::runtime_error("sequence: numbering gap in '" + dir + "': expected frame " +
                                     std::to_string(expected) + ", found " + std::to_string(index));
        }
        ++expected;
        seq.frames.push_back(read_png(path.string()));
        require_same_shape(seq.frames.front(), seq.frames.back(), "read_sequence");
    }
    return seq;
}

void write_sequence(const FrameSequence& seq, const std::string& dir) {
    namespace fs = std::filesystem;
    seq.check();
    fs::create_directories(dir);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%05zu.png", i);
        write_png(seq.frames[i], (fs::path(dir) / name).string());
    }
}

}  // namespace demfi
