#include "ttv/phantom.hpp"

#include <stdexcept>

namespace ttv {

namespace {

void require_levels(int size, double lo, double hi, const char* who) {
    if (size < 16)
        throw std::invalid_argument(std::string(who) + ": size must be at least 16");
    if (!(lo >= 0.0) || !(hi > lo) || !(hi <= 255.0))
        throw std::invalid_argument(std::string(who) +
                                    ": levels must satisfy 0 <= lo < hi <= 255");
}

}  // namespace

ImageGrid make_circle(int size, double lo, double hi) {
    require_levels(size, lo, hi, "make_circle");
    ImageGrid img(size, size, lo, 255.0);
    const double c = 0.5 * (size - 1);
    const double r2 = (size / 4.0) * (size / 4.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = x - c, dy = y - c;
            if (dx * dx + dy * dy <= r2) img.at(x, y) = hi;
        }
    return img;
}

ImageGrid make_checkerboard(int size, int tile, double lo, double hi) {
    require_levels(size, lo, hi, "make_checkerboard");
    if (tile < 1)
        throw std::invalid_argument("make_checkerboard: tile must be at least 1");
    ImageGrid img(size, size, lo, 255.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (((x / tile) + (y / tile)) % 2 == 0) img.at(x, y) = hi;
    return img;
}

ImageGrid make_ramp(int size, double lo, double hi) {
    require_levels(size, lo, hi, "make_ramp");
    ImageGrid img(size, size, lo, 255.0);
    const double step = (hi - lo) / (size - 1);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) img.at(x, y) = lo + step * x;
    return img;
}

}  // namespace ttv
