#include "ttv/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ttv {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// Next header token, skipping whitespace and '#' comments that run to the
// end of their line.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_dim(const std::string& tok, const std::string& path, const char* what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail(path, std::string("bad PGM ") + what + " '" + tok + "'");
    }
}

void require_writable(const ImageGrid& img, const std::string& path) {
    if (img.width < 1 || img.height < 1 ||
        img.data.size() != static_cast<std::size_t>(img.width) * img.height)
        fail(path, "refusing to write malformed image");
}

std::vector<std::uint8_t> quantized_bytes(const ImageGrid& img) {
    std::vector<std::uint8_t> bytes(img.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = quantize(img.data[i], img.max_level);
    return bytes;
}

std::string lower_ext(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

}  // namespace

std::uint8_t quantize(double v, double max_level) {
    const double unit = std::clamp(v / max_level, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(unit * 255.0));
}

ImageGrid read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    if (pgm_token(in) != "P5") fail(path, "not a binary PGM (P5) file");
    const int w = parse_dim(pgm_token(in), path, "width");
    const int h = parse_dim(pgm_token(in), path, "height");
    const int maxval = parse_dim(pgm_token(in), path, "maxval");
    if (maxval > 65535) fail(path, "PGM maxval exceeds 65535");
    // pgm_token consumed exactly one whitespace byte after the maxval, so
    // the sample data starts here
    ImageGrid img(w, h, 0.0, static_cast<double>(maxval));
    const std::size_t n = img.size();
    if (maxval < 256) {
        std::vector<std::uint8_t> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) fail(path, "truncated PGM data");
        for (std::size_t i = 0; i < n; ++i) img.data[i] = raw[i];
    } else {
        std::vector<std::uint8_t> raw(2 * n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
        if (static_cast<std::size_t>(in.gcount()) != 2 * n) fail(path, "truncated PGM data");
        for (std::size_t i = 0; i < n; ++i)
            img.data[i] = raw[2 * i] * 256.0 + raw[2 * i + 1];
    }
    return img;
}

void write_pgm(const ImageGrid& img, const std::string& path) {
    require_writable(img, path);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    const auto bytes = quantized_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(path, "write failed");
}

ImageGrid read_png(const std::string& path) {
    png_image pim{};
    pim.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pim, path.c_str()))
        fail(path, pim.message);
    pim.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pim));
    if (!png_image_finish_read(&pim, nullptr, buf.data(), 0, nullptr))
        fail(path, pim.message);
    ImageGrid img(static_cast<int>(pim.width), static_cast<int>(pim.height), 0.0, 255.0);
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = buf[i];
    return img;
}

void write_png(const ImageGrid& img, const std::string& path) {
    require_writable(img, path);
    png_image pim{};
    pim.version = PNG_IMAGE_VERSION;
    pim.width = static_cast<png_uint_32>(img.width);
    pim.height = static_cast<png_uint_32>(img.height);
    pim.format = PNG_FORMAT_GRAY;
    const auto bytes = quantized_bytes(img);
    if (!png_image_write_to_file(&pim, path.c_str(), 0, bytes.data(), 0, nullptr))
        fail(path, pim.message);
}

ImageGrid read_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    fail(path, "unsupported image format (expected .pgm or .png)");
}

void write_image(const ImageGrid& img, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".pgm") return write_pgm(img, path);
    if (ext == ".png") return write_png(img, path);
    fail(path, "unsupported image format (expected .pgm or .png)");
}

}  // namespace ttv
