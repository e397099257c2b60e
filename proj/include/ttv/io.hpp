#ifndef TTV_IO_HPP
#define TTV_IO_HPP

#include <cstdint>
#include <string>

#include "ttv/image.hpp"

namespace ttv {

/// Map an intensity to an 8-bit level: clamp v/max_level to [0,1], scale to
/// 255, round half away from zero.
std::uint8_t quantize(double v, double max_level);

/// Binary PGM (P5). Reading accepts '#' comments in the header and either
/// 8-bit or big-endian 16-bit samples; max_level is the file's maxval.
/// Writing always exports 8-bit with maxval 255.
ImageGrid read_pgm(const std::string& path);
void write_pgm(const ImageGrid& img, const std::string& path);

/// 8-bit grayscale PNG; color or 16-bit input is converted on read.
ImageGrid read_png(const std::string& path);
void write_png(const ImageGrid& img, const std::string& path);

/// Dispatch on the file extension (.pgm or .png, case-insensitive).
ImageGrid read_image(const std::string& path);
void write_image(const ImageGrid& img, const std::string& path);

}  // namespace ttv

#endif
