#ifndef TTV_PHANTOM_HPP
#define TTV_PHANTOM_HPP

#include "ttv/image.hpp"

namespace ttv {

/// Two-level disc: value hi inside the circle of radius size/4 centered at
/// ((size-1)/2, (size-1)/2), lo outside. max_level is 255.
ImageGrid make_circle(int size, double lo = 50.0, double hi = 200.0);

/// Alternating lo/hi squares of the given tile side, hi in the top-left.
ImageGrid make_checkerboard(int size, int tile, double lo = 50.0, double hi = 200.0);

/// Horizontal linear ramp from lo in the first column to hi in the last.
ImageGrid make_ramp(int size, double lo = 50.0, double hi = 200.0);

}  // namespace ttv

#endif
