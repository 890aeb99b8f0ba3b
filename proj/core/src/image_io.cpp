#include "platesift/image_io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "platesift/error.hpp"

namespace platesift {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct NetpbmHeader {
    char kind = 0;
    int width = 0;
    int height = 0;
    std::size_t data_offset = 0;
};

// Parses "P5"/"P6" headers including '#' comments. Exactly one whitespace
// byte separates maxval from the raster.
NetpbmHeader parse_netpbm(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw FormatError(path.string() + ": not a binary PGM/PPM file");
    }
    std::size_t pos = 2;
    auto next_int = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw FormatError(path.string() + ": malformed netpbm header");
        }
        long long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > 1'000'000) throw FormatError(path.string() + ": header value out of range");
        }
        return static_cast<int>(v);
    };
    NetpbmHeader h;
    h.kind = static_cast<char>(bytes[1]);
    h.width = next_int();
    h.height = next_int();
    const int maxval = next_int();
    if (maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
    if (h.width < 1 || h.height < 1) throw FormatError(path.string() + ": empty image");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw FormatError(path.string() + ": malformed netpbm header");
    }
    h.data_offset = pos + 1;
    const std::size_t channels = h.kind == '5' ? 1 : 3;
    if (bytes.size() - h.data_offset < channels * h.width * h.height) {
        throw FormatError(path.string() + ": truncated raster");
    }
    return h;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const auto h = parse_netpbm(bytes, path);
    if (h.kind != '5') throw FormatError(path.string() + ": expected P5");
    std::vector<double> data(static_cast<std::size_t>(h.width) * h.height);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = bytes[h.data_offset + i] / 255.0;
    return {h.width, h.height, std::move(data)};
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<char> raster(img.size());
    const auto src = img.data();
    for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = static_cast<char>(to_byte(src[i]));
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const auto h = parse_netpbm(bytes, path);
    if (h.kind != '6') throw FormatError(path.string() + ": expected P6");
    RgbImage rgb{h.width, h.height, {}};
    const auto begin = bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset);
    rgb.data.assign(begin, begin + 3 * static_cast<std::ptrdiff_t>(h.width) * h.height);
    return rgb;
}

GrayImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw FormatError(path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    RgbImage rgb{static_cast<int>(image.width), static_cast<int>(image.height), {}};
    rgb.data.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgb.data.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError(path.string() + ": " + msg);
    }
    return to_grayscale(rgb);
}

GrayImage read_image(const std::filesystem::path& path) {
    std::array<char, 8> magic{};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path.string());
        in.read(magic.data(), magic.size());
    }
    if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
    if (magic[0] == 'P' && magic[1] == '6') return to_grayscale(read_ppm(path));
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
        return read_png(path);
    }
    throw FormatError(path.string() + ": unsupported image format");
}

}  // namespace platesift
