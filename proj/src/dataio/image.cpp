#include "underloc/dataio/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "underloc/common/errors.hpp"

namespace underloc::dataio {

namespace {

struct Netpbm {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<std::uint8_t> data;
};

Netpbm read_p5(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open image: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    const std::string where = path.string();
    std::size_t pos = 0;

    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&](const char* field) {
        skip_space_and_comments();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw ParseError(where + ": malformed PGM header (" + field + ")");
        }
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > 1'000'000) throw ParseError(where + ": PGM " + field + " out of range");
        }
        return static_cast<int>(v);
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw ParseError(where + ": not a binary PGM (expected magic P5)");
    }
    pos = 2;
    Netpbm img;
    img.width = read_int("width");
    img.height = read_int("height");
    img.maxval = read_int("maxval");
    if (img.width < 1 || img.height < 1) throw ParseError(where + ": PGM dimensions must be >= 1");
    if (img.maxval < 1 || img.maxval > 255) {
        throw ParseError(where + ": unsupported PGM maxval " + std::to_string(img.maxval));
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw ParseError(where + ": malformed PGM header (missing separator)");
    }
    ++pos;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (bytes.size() - pos < n) throw ParseError(where + ": truncated PGM pixel data");
    img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

void write_netpbm(const std::filesystem::path& path, const char* magic, int width, int height,
                  const std::vector<std::uint8_t>& data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << magic << '\n' << width << ' ' << height << "\n255\n";
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::uint8_t to_level(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    const Netpbm raw = read_p5(path);
    GrayImage img(raw.width, raw.height);
    const float scale = 1.0f / static_cast<float>(raw.maxval);
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        img.pixels[i] = std::min(1.0f, raw.data[i] * scale);
    }
    return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::vector<std::uint8_t> data(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), data.begin(), to_level);
    write_netpbm(path, "P5", image.width, image.height, data);
}

BinaryMask load_mask(const std::filesystem::path& path) {
    const Netpbm raw = read_p5(path);
    BinaryMask mask(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.data.size(); ++i) mask.bits[i] = raw.data[i] > 0 ? 1 : 0;
    return mask;
}

BinaryMask load_mask(const std::filesystem::path& path, int expected_width, int expected_height) {
    BinaryMask mask = load_mask(path);
    if (mask.width != expected_width || mask.height != expected_height) {
        throw ConsistencyError(path.string() + ": mask is " + std::to_string(mask.width) + "x" +
                               std::to_string(mask.height) + ", expected " +
                               std::to_string(expected_width) + "x" +
                               std::to_string(expected_height));
    }
    return mask;
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> data(mask.bits.size());
    std::transform(mask.bits.begin(), mask.bits.end(), data.begin(),
                   [](std::uint8_t b) { return b ? std::uint8_t{255} : std::uint8_t{0}; });
    write_netpbm(path, "P5", mask.width, mask.height, data);
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
    write_netpbm(path, "P6", image.width, image.height, image.pixels);
}

void quantize_to_8bit(GrayImage& image) {
    for (float& v : image.pixels) v = static_cast<float>(to_level(v)) / 255.0f;
}

GrayImage resample_area(const GrayImage& image, int new_width, int new_height) {
    if (new_width == image.width && new_height == image.height) return image;
    GrayImage out(new_width, new_height);
    const double fx = static_cast<double>(image.width) / new_width;
    const double fy = static_cast<double>(image.height) / new_height;

    // Separable box filter with fractional coverage at the cell edges.
    auto weights = [](double lo, double hi, int limit) {
        std::vector<std::pair<int, double>> w;
        const int first = static_cast<int>(std::floor(lo));
        const int last = std::min(limit - 1, static_cast<int>(std::ceil(hi)) - 1);
        for (int i = std::max(0, first); i <= last; ++i) {
            const double cover = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
            if (cover > 0.0) w.emplace_back(i, cover);
        }
        return w;
    };

    std::vector<std::vector<std::pair<int, double>>> col_w(new_width);
    for (int x = 0; x < new_width; ++x) col_w[x] = weights(x * fx, (x + 1) * fx, image.width);

    for (int y = 0; y < new_height; ++y) {
        const auto row_w = weights(y * fy, (y + 1) * fy, image.height);
        for (int x = 0; x < new_width; ++x) {
            double sum = 0.0;
            double total = 0.0;
            for (const auto& [sy, wy] : row_w) {
                for (const auto& [sx, wx] : col_w[x]) {
                    sum += wy * wx * image.at(sx, sy);
                    total += wy * wx;
                }
            }
            out.at(x, y) = static_cast<float>(sum / total);
        }
    }
    return out;
}

}  // namespace underloc::dataio
