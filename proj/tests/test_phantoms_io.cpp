#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "svtv/geometry.hpp"
#include "svtv/image_io.hpp"
#include "svtv/phantom.hpp"
#include "util.hpp"

using namespace svtv;

TEST_CASE("rng: engine is the standard mt19937_64, sampler is pinned") {
    Rng rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next();
    CHECK(v == 9981545732273789042ULL);  // the standard's 10000th output for the default seed

    // Box-Muller on 53-bit uniforms, recomputed from the raw engine.
    std::mt19937_64 eng(9);
    const double u1 = 1.0 - static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    Rng mine(9);
    CHECK(mine.normal() == r * std::cos(2.0 * std::numbers::pi * u2));
    CHECK(mine.normal() == r * std::sin(2.0 * std::numbers::pi * u2));

    Rng big(1);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = big.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("phantom: empty spec is the background") {
    PhantomSpec spec;
    spec.side = 8;
    for (double v : make_phantom(spec).pixels) CHECK(v == 0.0);
    spec.background = 0.25;
    for (double v : make_phantom(spec).pixels) CHECK(v == 0.25);
}

TEST_CASE("phantom: centred disk has the analytic area") {
    for (std::size_t side : {32, 64, 100}) {
        const auto img = make_phantom(preset_phantom("disk", side));
        double count = 0;
        for (double v : img.pixels) count += v == 1.0;
        const double r = side / 4.0;
        CHECK(std::abs(count - std::numbers::pi * r * r) <= static_cast<double>(side));
    }
}

TEST_CASE("phantom: later shapes overwrite earlier ones, values stay in [0, 1]") {
    PhantomSpec spec;
    spec.side = 20;
    spec.shapes.push_back({ShapeKind::disk, 10, 10, 6, 0, 0.3});
    spec.shapes.push_back({ShapeKind::rect, 10, 10, 2, 2, 0.9});
    const auto img = make_phantom(spec);
    CHECK(img.at(10, 10) == 0.9);
    CHECK(img.at(10, 6) == 0.3);
    CHECK(img.at(0, 0) == 0.0);
    spec.shapes.push_back({ShapeKind::disk, 1, 1, 5, 0, 0.5});
    CHECK_THROWS_AS(make_phantom(spec), Error);
    spec.shapes.back() = {ShapeKind::disk, 10, 10, 2, 0, 1.5};
    CHECK_THROWS_AS(make_phantom(spec), Error);
}

TEST_CASE("synthetic-ct preset: thin cross and a high-density disk") {
    const auto spec = preset_phantom("synthetic-ct", 64);
    const auto img = make_phantom(spec);
    double hi = 0;
    for (double v : img.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        hi = std::max(hi, v);
    }
    CHECK(hi == 1.0);

    const Shape* cross = nullptr;
    for (const auto& s : spec.shapes)
        if (s.kind == ShapeKind::cross) cross = &s;
    REQUIRE(cross != nullptr);
    // Arms one pixel thick: the cross row has intensity 0.8 while the rows above and
    // below it, away from the vertical arm, do not.
    const auto r = static_cast<std::size_t>(cross->cy);
    const auto c = static_cast<std::size_t>(cross->cx);
    CHECK(img.at(r, c + 3) == cross->intensity);
    CHECK(img.at(r - 1, c + 3) != cross->intensity);
    CHECK(img.at(r + 1, c + 3) != cross->intensity);
    CHECK(img.at(r + 3, c) == cross->intensity);
    CHECK(img.at(r + 3, c - 1) != cross->intensity);
    CHECK(img.at(r + 3, c + 1) != cross->intensity);
    CHECK_THROWS_AS(preset_phantom("synthetic-ct", 8), Error);
    CHECK_THROWS_AS(preset_phantom("shepp", 64), Error);
}

TEST_CASE("synthetic-ct preset matches the golden raster") {
    const auto golden = read_image(std::filesystem::path(SVTV_TEST_DATA) / "synthetic_ct_64.img", 64);
    CHECK(make_phantom(preset_phantom("synthetic-ct", 64)) == golden);
}

TEST_CASE("sinogram simulation: noise level and determinism") {
    const auto geom = Geometry::parallel(32, 45, Geometry::covering_detectors(32));
    const auto K = build_projector(geom);
    const auto gt = make_phantom(preset_phantom("synthetic-ct", 32));

    const auto clean = simulate_sinogram(gt, K, 45, geom.n_detectors, {0.0, 1});
    CHECK(clean.noisy == clean.clean);
    CHECK(clean.delta == 0.0);
    CHECK(clean.clean.values == K.apply(gt.pixels));

    for (double nu : {0.005, 0.02, 0.3}) {
        const auto sim = simulate_sinogram(gt, K, 45, geom.n_detectors, {nu, 42});
        const auto e = difference(sim.noisy.values, sim.clean.values);
        CHECK(std::abs(norm2(e) / norm2(sim.clean.values) - nu) <= 1e-12);
        CHECK(sim.delta == doctest::Approx(norm2(e)).epsilon(1e-12));
        CHECK_FALSE(sim.zero_signal_warning);
    }
    const auto a = simulate_sinogram(gt, K, 45, geom.n_detectors, {0.005, 7});
    const auto b = simulate_sinogram(gt, K, 45, geom.n_detectors, {0.005, 7});
    const auto c = simulate_sinogram(gt, K, 45, geom.n_detectors, {0.005, 8});
    CHECK(a.noisy == b.noisy);
    CHECK(a.noisy != c.noisy);
}

TEST_CASE("sinogram simulation: zero signal warns and adds no noise") {
    const auto geom = Geometry::parallel(16, 10, Geometry::covering_detectors(16));
    const auto K = build_projector(geom);
    const auto sim = simulate_sinogram(Image(16, 16), K, 10, geom.n_detectors, {0.1, 3});
    CHECK(sim.zero_signal_warning);
    for (double v : sim.noisy.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(simulate_sinogram(Image(16, 16), K, 10, geom.n_detectors, {-0.1, 3}), Error);
    CHECK_THROWS_AS(simulate_sinogram(Image(8, 8), K, 10, geom.n_detectors, {0.1, 3}), Error);
}

TEST_CASE("image io: raw round trip is bit exact, pgm within one level") {
    testutil::TempDir dir("io");
    const auto img = testutil::random_image(13, 17, 3, -0.5, 1.5);
    write_image(img, dir / "a.img");
    CHECK(read_image(dir / "a.img") == img);
    CHECK(read_image(dir / "a.img").rows == 13);

    const Image half(9, 9, 0.5);
    write_image(half, dir / "h.pgm");
    const auto back = read_image(dir / "h.pgm", 9);
    for (double v : back.pixels) CHECK(std::abs(v - 0.5) <= 1.0 / 65535.0);

    // pgm clamps to [0, 1]
    write_image(img, dir / "c.pgm");
    const auto clamped = read_image(dir / "c.pgm");
    for (std::size_t i = 0; i < img.size(); ++i)
        CHECK(std::abs(clamped.pixels[i] - std::clamp(img.pixels[i], 0.0, 1.0)) <= 1.0 / 65535.0);

    // the extension picks the format, the magic decides on read
    write_image(half, dir / "h.bin", ImageFormat::pgm16);
    CHECK(read_image(dir / "h.bin") == back);
    CHECK(format_from_extension("x.pgm") == ImageFormat::pgm16);
    CHECK(format_from_extension("x.img") == ImageFormat::raw_f64);
    CHECK(parse_image_format("raw_f64") == ImageFormat::raw_f64);
    CHECK_THROWS_AS(parse_image_format("png"), Error);
}

TEST_CASE("image io: error contracts") {
    testutil::TempDir dir("ioerr");
    const auto img = testutil::random_image(8, 8, 1);
    write_image(img, dir / "a.img");
    CHECK_THROWS_AS(read_image(dir / "a.img", 9), Error);

    {
        std::ifstream in(dir / "a.img", std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream(dir / "t.img", std::ios::binary) << bytes.substr(0, bytes.size() - 5);
        std::ofstream(dir / "h.img", std::ios::binary) << bytes.substr(0, 10);
    }
    CHECK_THROWS_WITH_AS(read_image(dir / "t.img"), doctest::Contains("does not match"), Error);
    CHECK_THROWS_WITH_AS(read_image(dir / "h.img"), doctest::Contains("truncated"), Error);
    std::ofstream(dir / "m.img", std::ios::binary) << std::string(40, 'z');
    CHECK_THROWS_WITH_AS(read_image(dir / "m.img"), doctest::Contains("unrecognized"), Error);

    std::ofstream(dir / "bad.pgm", std::ios::binary) << "P5\n4 x\n65535\n";
    CHECK_THROWS_WITH_AS(read_image(dir / "bad.pgm"), doctest::Contains("malformed"), Error);
    std::ofstream(dir / "eight.pgm", std::ios::binary) << "P5\n1 1\n255\n" << '\x10';
    CHECK_THROWS_WITH_AS(read_image(dir / "eight.pgm"), doctest::Contains("65535"), Error);
    std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n2 2\n65535\n" << "abc";
    CHECK_THROWS_WITH_AS(read_image(dir / "short.pgm"), doctest::Contains("payload"), Error);
    std::ofstream(dir / "junk.img", std::ios::binary) << "hello world, not an image";
    CHECK_THROWS_AS(read_image(dir / "junk.img"), Error);
    CHECK_THROWS_AS(read_image(dir / "missing.img"), Error);
}

TEST_CASE("sinogram io round trip") {
    testutil::TempDir dir("sino");
    Rng rng(2);
    const Sinogram s(5, 7, testutil::random_vector(35, rng));
    write_sinogram(s, dir / "s.img");
    CHECK(read_sinogram(dir / "s.img") == s);
}
