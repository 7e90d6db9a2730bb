#include "svtv/reconstructors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "svtv/image_io.hpp"
#include "svtv/rng.hpp"
#include "svtv/solver.hpp"

namespace svtv {

namespace {

std::size_t padded_length(std::size_t n_detectors) {
    std::size_t p = 64;
    while (p < 2 * n_detectors) p *= 2;
    return p;
}

// Fan rays mapped onto the parallel grid with the same angle count over 180
// degrees and unit-spaced detectors covering the image; each bin averages the
// fan samples that land on it.
std::pair<Geometry, Sinogram> rebin_fan(const Sinogram& y, const Geometry& geom) {
    const std::size_t n_angles = geom.n_angles();
    Geometry par = Geometry::parallel(geom.image_side, n_angles, Geometry::covering_detectors(geom.image_side));
    const std::size_t nd = par.n_detectors;
    std::vector<double> sum(n_angles * nd, 0.0);
    std::vector<std::size_t> count(n_angles * nd, 0);
    const double dphi = std::numbers::pi / static_cast<double>(n_angles);
    for (std::size_t a = 0; a < geom.n_angles(); ++a) {
        for (std::size_t d = 0; d < geom.n_detectors; ++d) {
            const RaySegment ray = ray_for(geom, a, d);
            const double dx = ray.end.x - ray.start.x;
            const double dy = ray.end.y - ray.start.y;
            double phi = std::atan2(-dx, dy);
            double s = ray.start.x * std::cos(phi) + ray.start.y * std::sin(phi);
            if (phi < 0.0) {
                phi += std::numbers::pi;
                s = -s;
            }
            auto ai = static_cast<long>(std::lround(phi / dphi));
            if (ai >= static_cast<long>(n_angles)) {
                ai -= static_cast<long>(n_angles);
                s = -s;
            }
            const long di = std::lround(s + 0.5 * static_cast<double>(nd - 1));
            if (di < 0 || di >= static_cast<long>(nd)) continue;
            const std::size_t bin = static_cast<std::size_t>(ai) * nd + static_cast<std::size_t>(di);
            sum[bin] += y.values[a * geom.n_detectors + d];
            ++count[bin];
        }
    }
    for (std::size_t i = 0; i < sum.size(); ++i)
        if (count[i] > 0) sum[i] /= static_cast<double>(count[i]);
    return {par, Sinogram(n_angles, nd, std::move(sum))};
}

Image as_image(std::vector<double> v, std::size_t side) { return Image(side, side, std::move(v)); }

}  // namespace

ReconstructorKind parse_reconstructor_kind(std::string_view name) {
    if (name == "gt") return ReconstructorKind::gt;
    if (name == "fbp") return ReconstructorKind::fbp;
    if (name == "early_tv") return ReconstructorKind::early_tv;
    if (name == "file") return ReconstructorKind::file;
    throw Error("unknown reconstructor kind '" + std::string(name) + "' (expected gt|fbp|early_tv|file)");
}

std::string_view to_string(ReconstructorKind k) {
    switch (k) {
        case ReconstructorKind::gt:
            return "gt";
        case ReconstructorKind::fbp:
            return "fbp";
        case ReconstructorKind::early_tv:
            return "early_tv";
        case ReconstructorKind::file:
            return "file";
    }
    return "fbp";
}

void ReconstructorSpec::validate() const {
    if (kind == ReconstructorKind::fbp) require(cutoff > 0.0 && cutoff <= 1.0, "reconstructor: cutoff must lie in (0, 1]");
    if (kind == ReconstructorKind::early_tv) {
        require(iterations >= 1, "reconstructor: early_tv iteration cap must be >= 1");
        require(lambda >= 0.0, "reconstructor: lambda must be >= 0");
    }
    if (kind == ReconstructorKind::file) require(!path.empty(), "reconstructor: file kind needs a path");
}

std::string ReconstructorSpec::id() const {
    switch (kind) {
        case ReconstructorKind::early_tv:
            return "early_tv(" + std::to_string(iterations) + ")";
        case ReconstructorKind::file:
            return "file(" + path.filename().string() + ")";
        default:
            return std::string(to_string(kind));
    }
}

std::vector<double> ramp_filter(std::size_t padded, double cutoff) {
    require(padded >= 2 && padded % 2 == 0, "ramp filter: padded length must be even");
    require(cutoff > 0.0 && cutoff <= 1.0, "ramp filter: cutoff must lie in (0, 1]");
    // Spatial Ram-Lak kernel, sampled so the DC term is not lost to truncation.
    std::vector<std::complex<double>> h(padded, 0.0);
    h[0] = 0.25;
    for (std::size_t j = 1; j <= padded / 2; ++j) {
        if (j % 2 == 0) continue;
        const double v = -1.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(j * j));
        h[j] = v;
        if (padded - j != j) h[padded - j] = v;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, h);
    std::vector<double> out(padded);
    const double keep = cutoff * 0.5 * static_cast<double>(padded);
    for (std::size_t k = 0; k < padded; ++k) {
        const double freq = static_cast<double>(std::min(k, padded - k));
        out[k] = freq <= keep ? 2.0 * spectrum[k].real() : 0.0;
    }
    return out;
}

Image fbp(const Sinogram& y, const Geometry& geom, double cutoff, const SparseOperator* K) {
    geom.validate();
    require(y.n_angles == geom.n_angles() && y.n_detectors == geom.n_detectors,
            "fbp: sinogram shape does not match the geometry");
    require(geom.n_detectors >= 2, "fbp: needs at least 2 detector cells");
    if (geom.mode == BeamMode::fan) {
        const auto [par, rebinned] = rebin_fan(y, geom);
        return fbp(rebinned, par, cutoff, nullptr);
    }

    SparseOperator own;
    if (K == nullptr) {
        own = build_projector(geom);
        K = &own;
    }
    require(K->rows() == y.size() && K->cols() == geom.n_pixels(), "fbp: projector does not match the geometry");

    const std::size_t nd = geom.n_detectors;
    const std::size_t padded = padded_length(nd);
    const auto filter = ramp_filter(padded, cutoff);
    Eigen::FFT<double> fft;
    std::vector<double> filtered(y.size());
    std::vector<std::complex<double>> row(padded), spec, back;
    for (std::size_t a = 0; a < geom.n_angles(); ++a) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t d = 0; d < nd; ++d) row[d] = y.values[a * nd + d];
        fft.fwd(spec, row);
        for (std::size_t k = 0; k < padded; ++k) spec[k] *= filter[k];
        fft.inv(back, spec);
        for (std::size_t d = 0; d < nd; ++d) filtered[a * nd + d] = back[d].real();
    }
    auto x = K->apply(filtered, ApplyMode::adjoint);
    // pi / (2 N) pairs with the factor 2 folded into the filter; the detector
    // spacing undoes the 1/spacing density of rays in the backprojection.
    const double scale = std::numbers::pi / (2.0 * static_cast<double>(geom.n_angles())) * geom.detector_spacing;
    for (auto& v : x) v = std::max(0.0, v * scale);
    return as_image(std::move(x), geom.image_side);
}

Image reconstruct(const ReconstructorSpec& spec, const Sinogram& y, const ReconstructorContext& ctx) {
    spec.validate();
    switch (spec.kind) {
        case ReconstructorKind::gt:
            require(ctx.ground_truth != nullptr, "reconstructor gt: no ground truth configured");
            return *ctx.ground_truth;
        case ReconstructorKind::file: {
            require(std::filesystem::exists(spec.path), "reconstructor file: missing " + spec.path.string());
            const std::size_t side = ctx.geom ? ctx.geom->image_side : 0;
            return read_image(spec.path, side);
        }
        case ReconstructorKind::fbp:
            require(ctx.geom != nullptr, "reconstructor fbp: geometry required");
            return fbp(y, *ctx.geom, spec.cutoff, ctx.geom->mode == BeamMode::parallel ? ctx.K : nullptr);
        case ReconstructorKind::early_tv: {
            require(ctx.geom != nullptr || ctx.K != nullptr, "reconstructor early_tv: geometry or projector required");
            SparseOperator own;
            const SparseOperator* K = ctx.K;
            if (K == nullptr) {
                own = build_projector(*ctx.geom);
                K = &own;
            }
            const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(K->cols()))));
            require(side * side == K->cols(), "reconstructor early_tv: projector columns are not a square grid");
            const GradientOperator D(side, side, ctx.boundary);
            SolverConfig cfg;
            cfg.lambda = spec.lambda;
            cfg.max_iter = spec.iterations;
            cfg.operator_norm = ctx.operator_norm;
            cfg.diagnostics_every = spec.iterations;
            auto result = cp_solve(*K, D, y.values, {}, cfg);
            return as_image(std::move(result.x), side);
        }
    }
    throw Error("reconstruct: unhandled kind");
}

double estimate_accuracy(const ReconstructorSpec& spec, std::span<const Image> samples, const SparseOperator& K,
                         double p_norm, const ReconstructorContext& ctx) {
    require(!samples.empty(), "estimate_accuracy: empty sample set");
    const std::size_t nd = ctx.geom ? ctx.geom->n_detectors : K.rows();
    double worst = 0.0;
    for (const auto& x : samples) {
        ReconstructorContext local = ctx;
        local.ground_truth = &x;
        local.K = &K;
        const Sinogram y(K.rows() / nd, nd, K.apply(x.pixels));
        const Image rec = reconstruct(spec, y, local);
        worst = std::max(worst, norm_p(difference(rec.pixels, x.pixels), p_norm));
    }
    return worst;
}

std::vector<double> stability_noise(std::size_t m, double p_norm, double epsilon, std::uint64_t seed,
                                    std::size_t sample, std::size_t draw) {
    // One generator per (sample, draw) so that taking more draws keeps the earlier ones.
    std::uint64_t s = seed;
    s ^= 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(sample) + 1);
    s ^= 0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(draw) + 1);
    Rng rng(s);
    const double radius = epsilon * (1.0 - rng.uniform());  // (0, epsilon]
    std::vector<double> e(m);
    for (auto& v : e) v = rng.normal();
    const double n = norm_p(e, p_norm);
    for (auto& v : e) v *= radius / n;
    return e;
}

ReconstructorQuality estimate_stability(const ReconstructorSpec& spec, std::span<const Image> samples,
                                        const SparseOperator& K, double p_norm, double epsilon, std::size_t n_noise,
                                        std::uint64_t seed, const ReconstructorContext& ctx) {
    require(epsilon > 0.0, "estimate_stability: epsilon must be > 0");
    require(n_noise >= 1, "estimate_stability: need at least one noise draw");
    ReconstructorQuality q;
    q.p_norm = p_norm;
    q.epsilon = epsilon;
    q.n_samples = samples.size();
    q.n_noise = n_noise;
    q.eta_p = estimate_accuracy(spec, samples, K, p_norm, ctx);
    q.c_eps = -std::numeric_limits<double>::infinity();
    const std::size_t nd = ctx.geom ? ctx.geom->n_detectors : K.rows();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Image& x = samples[i];
        ReconstructorContext local = ctx;
        local.ground_truth = &x;
        local.K = &K;
        const auto clean = K.apply(x.pixels);
        for (std::size_t j = 0; j < n_noise; ++j) {
            const auto e = stability_noise(K.rows(), p_norm, epsilon, seed, i, j);
            std::vector<double> noisy(clean.size());
            for (std::size_t r = 0; r < noisy.size(); ++r) noisy[r] = clean[r] + e[r];
            const Image rec = reconstruct(spec, Sinogram(K.rows() / nd, nd, std::move(noisy)), local);
            StabilityDraw d{i, j, norm_p(e, p_norm), norm_p(difference(rec.pixels, x.pixels), p_norm)};
            q.c_eps = std::max(q.c_eps, (d.error - q.eta_p) / d.noise_norm);
            q.draws.push_back(d);
        }
    }
    return q;
}

}  // namespace svtv
