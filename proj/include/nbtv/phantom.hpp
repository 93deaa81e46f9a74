#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nbtv/image.hpp"

namespace nbtv {

/// Built-in piecewise-constant phantoms.
///   "shapes": zero background, an elliptical body with nested rectangles and
///             ellipses at relative levels 0.15, 0.3, 0.6, 0.8 and 1.
///   "blocks": axis-aligned rectangles at relative levels 0.25, 0.5, 0.75, 1
///             on a zero background.
/// Every shape is defined in unit coordinates, so the layout scales with size.
/// Values are relative levels times intensity_scale. Throws ConfigError for an
/// unknown id or size < 16.
Image make_phantom(const std::string& id, std::size_t size, double intensity_scale);

std::vector<std::string> phantom_ids();

}  // namespace nbtv
