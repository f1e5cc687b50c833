#pragma once

#include <cstdint>
#include <filesystem>

#include "viewopt/raster.hpp"

namespace viewopt {

// Binary portable graymaps (P5). 16-bit samples are big-endian per Netpbm.

void write_pgm8(const std::filesystem::path& path, const Raster<std::uint8_t>& img, int maxval = 255);
void write_pgm16(const std::filesystem::path& path, const Raster<std::uint16_t>& img, int maxval = 65535);

struct PgmImage {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint16_t> samples;  // widened to 16 bits regardless of depth

    Raster<std::uint8_t> as_u8() const;
    Raster<std::uint16_t> as_u16() const;
};

PgmImage read_pgm(const std::filesystem::path& path);

// header only; cheap existence/dimension validation
struct PgmHeader {
    int width = 0;
    int height = 0;
    int maxval = 0;
};
PgmHeader read_pgm_header(const std::filesystem::path& path);

}  // namespace viewopt
