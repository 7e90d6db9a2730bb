#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "svtv/rng.hpp"
#include "svtv/types.hpp"

namespace testutil {

inline svtv::Image random_image(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = 0.0,
                                double hi = 1.0) {
    svtv::Rng rng(seed);
    svtv::Image img(rows, cols);
    for (auto& v : img.pixels) v = rng.uniform(lo, hi);
    return img;
}

inline std::vector<double> random_vector(std::size_t n, svtv::Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("svtv_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testutil
