#include "viewopt/pgm.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace viewopt {

namespace {

void write_header(std::ofstream& f, int width, int height, int maxval) {
    f << "P5\n" << width << " " << height << "\n" << maxval << "\n";
}

int read_token(std::istream& f) {
    // skips whitespace and '#' comments per the Netpbm grammar
    while (true) {
        int c = f.peek();
        if (c == '#') {
            std::string line;
            std::getline(f, line);
        } else if (std::isspace(c)) {
            f.get();
        } else {
            break;
        }
    }
    int value;
    if (!(f >> value)) throw std::runtime_error("pgm: malformed header token");
    return value;
}

}  // namespace

void write_pgm8(const std::filesystem::path& path, const Raster<std::uint8_t>& img, int maxval) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("pgm: cannot open for writing: " + path.string());
    write_header(f, img.width(), img.height(), maxval);
    f.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
    if (!f) throw std::runtime_error("pgm: write failed: " + path.string());
}

void write_pgm16(const std::filesystem::path& path, const Raster<std::uint16_t>& img, int maxval) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("pgm: cannot open for writing: " + path.string());
    write_header(f, img.width(), img.height(), maxval);
    std::vector<std::uint8_t> bytes(img.size() * 2);
    for (std::size_t i = 0; i < img.size(); ++i) {
        bytes[2 * i] = static_cast<std::uint8_t>(img[i] >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(img[i] & 0xff);
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("pgm: write failed: " + path.string());
}

Raster<std::uint8_t> PgmImage::as_u8() const {
    Raster<std::uint8_t> out(width, height);
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = static_cast<std::uint8_t>(samples[i]);
    return out;
}

Raster<std::uint16_t> PgmImage::as_u16() const {
    Raster<std::uint16_t> out(width, height);
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i];
    return out;
}

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("pgm: cannot open: " + path.string());
    char magic[2] = {0, 0};
    f.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("pgm: not a P5 file: " + path.string());

    PgmImage img;
    img.width = read_token(f);
    img.height = read_token(f);
    img.maxval = read_token(f);
    if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
        throw std::runtime_error("pgm: invalid header in " + path.string());
    f.get();  // single whitespace after maxval

    std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    img.samples.resize(n);
    if (img.maxval < 256) {
        std::vector<std::uint8_t> bytes(n);
        f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
        if (!f) throw std::runtime_error("pgm: truncated data in " + path.string());
        for (std::size_t i = 0; i < n; ++i) img.samples[i] = bytes[i];
    } else {
        std::vector<std::uint8_t> bytes(n * 2);
        f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n * 2));
        if (!f) throw std::runtime_error("pgm: truncated data in " + path.string());
        for (std::size_t i = 0; i < n; ++i)
            img.samples[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    return img;
}

PgmHeader read_pgm_header(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("pgm: cannot open: " + path.string());
    char magic[2] = {0, 0};
    f.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("pgm: not a P5 file: " + path.string());
    PgmHeader h;
    h.width = read_token(f);
    h.height = read_token(f);
    h.maxval = read_token(f);
    return h;
}

}  // namespace viewopt
