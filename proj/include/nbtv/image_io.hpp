#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nbtv/image.hpp"

namespace nbtv {

// Float CSV: first line "m,n", then m lines of n comma-separated reals.
// Values are written in shortest round-trip form, so write->read is exact.
std::string format_csv(const Image& img);
Image parse_csv(std::string_view text);

Image read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Image& img);

ObservedCounts read_counts_csv(const std::filesystem::path& path);
void write_counts_csv(const std::filesystem::path& path, const ObservedCounts& counts);

// Binary P5, maxval 65535. Pixel q stores value q * scale / 65535, where
// scale is written to "<path>.meta" as "scale = <real>". write_pgm picks
// scale = max(img) (1 for an all-zero image); values are clipped at 0 and
// rounded to the nearest level. A missing sidecar reads as scale = 1.
inline constexpr int kPgmMaxval = 65535;

void write_pgm(const std::filesystem::path& path, const Image& img);
void write_pgm(const std::filesystem::path& path, const Image& img, double scale);
Image read_pgm(const std::filesystem::path& path);

/// Dispatches on extension: ".pgm" reads PGM, anything else float CSV.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace nbtv
