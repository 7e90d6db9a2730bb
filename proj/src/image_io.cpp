#include "svtv/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace svtv {

namespace {

constexpr std::array<char, 8> kImageMagic{'S', 'V', 'T', 'V', 'I', 'M', 'G', '1'};

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_raw(std::size_t rows, std::size_t cols, std::span<const double> data, const std::filesystem::path& path) {
    require(rows <= UINT32_MAX && cols <= UINT32_MAX, "raw image dimensions exceed u32");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(kImageMagic.data(), kImageMagic.size());
    const auto r = static_cast<std::uint32_t>(rows);
    const auto c = static_cast<std::uint32_t>(cols);
    out.write(reinterpret_cast<const char*>(&r), 4);
    out.write(reinterpret_cast<const char*>(&c), 4);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw Error("failed writing " + path.string());
}

Image parse_raw(const std::vector<char>& bytes, const std::filesystem::path& path) {
    if (bytes.size() < 16) throw Error("truncated raw header in " + path.string());
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::memcpy(&rows, bytes.data() + 8, 4);
    std::memcpy(&cols, bytes.data() + 12, 4);
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (bytes.size() != 16 + n * sizeof(double))
        throw Error("raw payload size does not match declared " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " in " + path.string());
    std::vector<double> data(n);
    std::memcpy(data.data(), bytes.data() + 16, n * sizeof(double));
    return Image(rows, cols, std::move(data));
}

Image parse_pgm(const std::vector<char>& bytes, const std::filesystem::path& path) {
    // Header: "P5" <ws> width <ws> height <ws> maxval <single ws> payload. Comments are allowed.
    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        long value = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            value = value * 10 + (bytes[pos] - '0');
            if (value > 1'000'000'000L) break;
            ++pos;
            any = true;
        }
        if (!any) throw Error("malformed PGM header in " + path.string());
        return value;
    };
    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw Error("malformed PGM header in " + path.string());
    ++pos;
    if (maxval != 65535) throw Error("only 16-bit PGM (maxval 65535) is supported: " + path.string());
    if (width <= 0 || height <= 0) throw Error("malformed PGM dimensions in " + path.string());
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos != 2 * n) throw Error("PGM payload size does not match header in " + path.string());
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto hi = static_cast<unsigned char>(bytes[pos + 2 * i]);
        const auto lo = static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
        data[i] = static_cast<double>((hi << 8) | lo) / 65535.0;
    }
    return Image(static_cast<std::size_t>(height), static_cast<std::size_t>(width), std::move(data));
}

}  // namespace

ImageFormat parse_image_format(std::string_view name) {
    if (name == "pgm16" || name == "pgm") return ImageFormat::pgm16;
    if (name == "raw_f64" || name == "raw") return ImageFormat::raw_f64;
    throw Error("unknown image format '" + std::string(name) + "'");
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
    return path.extension() == ".pgm" ? ImageFormat::pgm16 : ImageFormat::raw_f64;
}

void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
    require(img.size() == img.rows * img.cols, "write_image: inconsistent image");
    if (format == ImageFormat::raw_f64) {
        write_raw(img.rows, img.cols, img.pixels, path);
        return;
    }
    std::ostringstream header;
    header << "P5\n" << img.cols << ' ' << img.rows << "\n65535\n";
    std::string payload = header.str();
    payload.reserve(payload.size() + 2 * img.size());
    for (double v : img.pixels) {
        const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        const auto q = static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
        payload.push_back(static_cast<char>(q >> 8));
        payload.push_back(static_cast<char>(q & 0xff));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error("failed writing " + path.string());
}

void write_image(const Image& img, const std::filesystem::path& path) {
    write_image(img, path, format_from_extension(path));
}

Image read_image(const std::filesystem::path& path, std::size_t expected_side) {
    const auto bytes = slurp(path);
    Image img;
    if (bytes.size() >= 8 && std::equal(kImageMagic.begin(), kImageMagic.end(), bytes.begin()))
        img = parse_raw(bytes, path);
    else if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        img = parse_pgm(bytes, path);
    else
        throw Error("unrecognized image header in " + path.string());
    if (expected_side != 0 && (img.rows != expected_side || img.cols != expected_side))
        throw Error("image " + path.string() + " is " + std::to_string(img.rows) + "x" + std::to_string(img.cols) +
                    ", expected side " + std::to_string(expected_side));
    return img;
}

void write_sinogram(const Sinogram& s, const std::filesystem::path& path) {
    write_raw(s.n_angles, s.n_detectors, s.values, path);
}

Sinogram read_sinogram(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    if (bytes.size() < 8 || !std::equal(kImageMagic.begin(), kImageMagic.end(), bytes.begin()))
        throw Error("unrecognized sinogram header in " + path.string());
    Image img = parse_raw(bytes, path);
    return Sinogram(img.rows, img.cols, std::move(img.pixels));
}

}  // namespace svtv
