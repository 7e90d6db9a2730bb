#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svtv/geometry.hpp"
#include "svtv/metrics.hpp"
#include "svtv/phantom.hpp"
#include "svtv/reconstructors.hpp"
#include "svtv/solver.hpp"
#include "svtv/weights.hpp"

namespace py = pybind11;
using namespace svtv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D image");
    return Image(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    Array out({rows, cols});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

// Parallel-beam geometry plus its projector, built once.
struct Projector {
    Geometry geom;
    SparseOperator K;
    GradientOperator D;

    Projector(std::size_t side, std::size_t n_angles, std::size_t n_detectors, double angle_range)
        : geom(Geometry::parallel(side, n_angles, n_detectors ? n_detectors : Geometry::covering_detectors(side),
                                  angle_range)),
          K(build_projector(geom)),
          D(side, side) {}

    Sinogram sinogram(const Array& s) const {
        if (s.ndim() != 2 || std::size_t(s.shape(0)) != geom.n_angles() ||
            std::size_t(s.shape(1)) != geom.n_detectors)
            throw py::value_error("sinogram shape does not match the projector");
        return Sinogram(geom.n_angles(), geom.n_detectors, flat(s));
    }
};

}  // namespace

PYBIND11_MODULE(_svtv, m) {
    m.doc() = "Weighted-TV sparse-view CT core";
    py::register_exception<Error>(m, "SvtvError", PyExc_ValueError);

    m.def(
        "phantom", [](const std::string& preset, std::size_t side) {
            const Image img = make_phantom(preset_phantom(preset, side));
            return to_array(img.pixels, side, side);
        },
        py::arg("preset") = "synthetic-ct", py::arg("side") = 64);

    py::class_<Projector>(m, "Projector")
        .def(py::init<std::size_t, std::size_t, std::size_t, double>(), py::arg("side"), py::arg("n_angles") = 45,
             py::arg("n_detectors") = 0, py::arg("angle_range") = 180.0)
        .def_property_readonly("side", [](const Projector& p) { return p.geom.image_side; })
        .def_property_readonly("n_angles", [](const Projector& p) { return p.geom.n_angles(); })
        .def_property_readonly("n_detectors", [](const Projector& p) { return p.geom.n_detectors; })
        .def_property_readonly("nnz", [](const Projector& p) { return p.K.nnz(); })
        .def("forward",
             [](const Projector& p, const Array& img) {
                 const Image x = to_image(img);
                 if (x.rows != p.geom.image_side || x.cols != p.geom.image_side)
                     throw py::value_error("image shape does not match the projector");
                 return to_array(p.K.apply(x.pixels), p.geom.n_angles(), p.geom.n_detectors);
             })
        .def("adjoint", [](const Projector& p, const Array& s) {
            return to_array(p.K.apply(p.sinogram(s).values, ApplyMode::adjoint), p.geom.image_side,
                            p.geom.image_side);
        });

    m.def(
        "simulate",
        [](const Projector& p, const Array& img, double nu, std::uint64_t seed) {
            const auto sim = simulate_sinogram(to_image(img), p.K, p.geom.n_angles(), p.geom.n_detectors, {nu, seed});
            return to_array(sim.noisy.values, p.geom.n_angles(), p.geom.n_detectors);
        },
        py::arg("projector"), py::arg("image"), py::arg("nu") = 0.005, py::arg("seed") = 42);

    m.def(
        "fbp",
        [](const Projector& p, const Array& s, double cutoff) {
            const Image x = fbp(p.sinogram(s), p.geom, cutoff, &p.K);
            return to_array(x.pixels, x.rows, x.cols);
        },
        py::arg("projector"), py::arg("sinogram"), py::arg("cutoff") = 1.0);

    m.def(
        "weights",
        [](const Array& img, double eta, double p) {
            const Image x = to_image(img);
            return to_array(compute_weights(x, WeightParams{eta, p}).w, x.rows, x.cols);
        },
        py::arg("image"), py::arg("eta") = 2e-5, py::arg("p") = 0.5);

    m.def(
        "solve",
        [](const Projector& p, const Array& s, std::optional<Array> w, double lam, std::size_t max_iter, double eps_j,
           double eps_x) {
            SolverConfig cfg;
            cfg.lambda = lam;
            cfg.max_iter = max_iter;
            cfg.eps_j = eps_j;
            cfg.eps_x = eps_x;
            const auto y = p.sinogram(s);
            const std::vector<double> weights = w ? flat(*w) : std::vector<double>{};
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = cp_solve(p.K, p.D, y.values, weights, cfg);
            }
            py::dict info;
            info["reason"] = std::string(to_string(r.trace.reason));
            info["iterations"] = r.trace.records.empty() ? 0 : r.trace.records.back().k;
            info["objective"] = r.trace.records.empty() ? 0.0 : r.trace.records.back().objective;
            info["operator_norm"] = r.trace.operator_norm;
            return py::make_tuple(to_array(r.x, p.geom.image_side, p.geom.image_side), info);
        },
        py::arg("projector"), py::arg("sinogram"), py::arg("weights") = py::none(), py::arg("lam") = 5.0,
        py::arg("max_iter") = 1000, py::arg("eps_j") = 0.0, py::arg("eps_x") = 0.0);

    m.def(
        "metrics",
        [](const Array& x, const Array& gt) {
            const auto r = evaluate(to_image(x), to_image(gt));
            py::dict d;
            d["re"] = r.re;
            d["psnr"] = r.psnr;
            d["ssim"] = r.ssim;
            d["row"] = format_re(r.re) + " & " + format_psnr(r.psnr) + " & " + format_ssim(r.ssim);
            return d;
        },
        py::arg("x"), py::arg("gt"));
}
