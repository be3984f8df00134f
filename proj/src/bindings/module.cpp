// numpy-facing bindings for the core operations: phantoms, projection,
// framelets, reconstruction and metrics. Sinograms travel as 2-D arrays
// (angle-major) plus an explicit angle index list.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctlab/io.hpp"
#include "ctlab/phantom.hpp"
#include "ctlab/solvers.hpp"

namespace py = pybind11;
using namespace ctlab;

namespace {

ImageGrid to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ShapeError("expected a 2-D array");
    ImageGrid img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::copy(arr.data(), arr.data() + img.size(), img.data.begin());
    img.validate();
    return img;
}

py::array_t<double> to_array(const ImageGrid& img) {
    py::array_t<double> arr({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
    return arr;
}

Sinogram to_sinogram(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
                     const std::vector<int>& angles) {
    if (arr.ndim() != 2) throw ShapeError("expected a 2-D sinogram array");
    if (static_cast<size_t>(arr.shape(0)) != angles.size())
        throw ShapeError("sinogram rows must match the angle list");
    Sinogram sino(angles, static_cast<int>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + sino.data.size(), sino.data.begin());
    return sino;
}

py::array_t<double> sino_array(const Sinogram& sino) {
    py::array_t<double> arr({sino.num_rows(), sino.detectors});
    std::copy(sino.data.begin(), sino.data.end(), arr.mutable_data());
    return arr;
}

HqsConfig make_config(std::vector<double> lambdas, std::vector<double> gammas, int iters,
                      double cg_tol, int cg_iters) {
    HqsConfig cfg;
    cfg.lambdas = std::move(lambdas);
    cfg.gammas = std::move(gammas);
    cfg.outer_iters = iters;
    cfg.cg_tol = cg_tol;
    cfg.cg_max_iters = cg_iters;
    return cfg;
}

py::list trace_list(const SolveTrace& trace) {
    py::list out;
    for (const IterationRecord& rec : trace) {
        py::dict d;
        d["iter"] = rec.iter;
        d["objective"] = rec.objective;
        d["primal_residual"] = rec.primal_residual;
        d["cg_iters"] = rec.cg_iters;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_ctlab, m) {
    m.doc() = "computational tomography laboratory core";

    py::class_<ProjectionGeometry>(m, "ProjectionGeometry")
        .def(py::init<int, int, int>(), py::arg("size"), py::arg("num_angles"),
             py::arg("detectors") = 0)
        .def_readonly("image_size", &ProjectionGeometry::image_size)
        .def_readonly("num_angles_total", &ProjectionGeometry::num_angles_total)
        .def_readonly("detectors", &ProjectionGeometry::detectors)
        .def("angle_radians", &ProjectionGeometry::angle_radians, py::arg("index"))
        .def("all_angles", &ProjectionGeometry::all_angles);

    m.def("shepp_logan", [](int size) { return to_array(shepp_logan(size)); }, py::arg("size"));

    m.def(
        "random_phantom",
        [](int size, uint64_t seed, int min_ellipses, int max_ellipses) {
            PhantomSpec spec;
            spec.size = size;
            spec.seed = seed;
            spec.num_ellipses_min = min_ellipses;
            spec.num_ellipses_max = max_ellipses;
            auto [img, label] = random_ellipse_phantom(spec);
            return py::make_tuple(to_array(img), label);
        },
        py::arg("size"), py::arg("seed"), py::arg("min_ellipses") = 1,
        py::arg("max_ellipses") = 4);

    m.def(
        "forward_project",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
           const ProjectionGeometry& geom, const std::vector<int>& angles) {
            return sino_array(forward_project(to_image(image), geom, angles));
        },
        py::arg("image"), py::arg("geom"), py::arg("angles"));

    m.def(
        "back_project",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& sino,
           const ProjectionGeometry& geom, const std::vector<int>& angles) {
            return to_array(back_project(to_sinogram(sino, angles), geom));
        },
        py::arg("sinogram"), py::arg("geom"), py::arg("angles"));

    m.def(
        "framelet_analysis",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
           int levels) {
            const ImageGrid img = to_image(image);
            FrameletCoeffs coeffs = analysis(img, FrameletSystem(levels));
            py::array_t<double> arr({levels, 9, img.height, img.width});
            double* dst = arr.mutable_data();
            for (const auto& plane : coeffs.planes)
                dst = std::copy(plane.begin(), plane.end(), dst);
            return arr;
        },
        py::arg("image"), py::arg("levels"));

    m.def(
        "framelet_synthesis",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& coeffs) {
            if (coeffs.ndim() != 4 || coeffs.shape(1) != 9 || coeffs.shape(2) != coeffs.shape(3))
                throw ShapeError("expected coefficients of shape (levels, 9, n, n)");
            const int levels = static_cast<int>(coeffs.shape(0));
            const int n = static_cast<int>(coeffs.shape(2));
            FrameletCoeffs fc(n, levels);
            const double* src = coeffs.data();
            for (auto& plane : fc.planes) {
                std::copy(src, src + plane.size(), plane.begin());
                src += plane.size();
            }
            return to_array(synthesis(fc, FrameletSystem(levels)));
        },
        py::arg("coeffs"));

    m.def(
        "sart",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& sino,
           const ProjectionGeometry& geom, const std::vector<int>& angles, int iters,
           double relax) {
            return to_array(sart(to_sinogram(sino, angles), geom, iters, relax));
        },
        py::arg("sinogram"), py::arg("geom"), py::arg("angles"), py::arg("iters") = 10,
        py::arg("relax") = 1.0);

    m.def(
        "hqs_reconstruct",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& sino,
           const ProjectionGeometry& geom, const std::vector<int>& angles, int levels,
           std::vector<double> lambdas, std::vector<double> gammas, int iters, double cg_tol,
           int cg_iters) {
            auto [image, trace] =
                hqs_reconstruct(to_sinogram(sino, angles), geom, FrameletSystem(levels),
                                make_config(std::move(lambdas), std::move(gammas), iters,
                                            cg_tol, cg_iters));
            return py::make_tuple(to_array(image), trace_list(trace));
        },
        py::arg("sinogram"), py::arg("geom"), py::arg("angles"), py::arg("levels") = 1,
        py::arg("lambdas") = std::vector<double>{0.01},
        py::arg("gammas") = std::vector<double>{1.0}, py::arg("iters") = 10,
        py::arg("cg_tol") = 1e-8, py::arg("cg_iters") = 200);

    m.def(
        "admm_reconstruct",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& sino,
           const ProjectionGeometry& geom, const std::vector<int>& angles, int levels,
           std::vector<double> lambdas, std::vector<double> gammas, int iters, double cg_tol,
           int cg_iters) {
            auto [image, trace] =
                admm_reconstruct(to_sinogram(sino, angles), geom, FrameletSystem(levels),
                                 make_config(std::move(lambdas), std::move(gammas), iters,
                                             cg_tol, cg_iters));
            return py::make_tuple(to_array(image), trace_list(trace));
        },
        py::arg("sinogram"), py::arg("geom"), py::arg("angles"), py::arg("levels") = 1,
        py::arg("lambdas") = std::vector<double>{0.01},
        py::arg("gammas") = std::vector<double>{1.0}, py::arg("iters") = 10,
        py::arg("cg_tol") = 1e-8, py::arg("cg_iters") = 200);

    m.def(
        "mse",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return mse(to_image(a), to_image(b));
        },
        py::arg("reference"), py::arg("candidate"));

    m.def(
        "psnr",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            return psnr(to_image(a), to_image(b));
        },
        py::arg("reference"), py::arg("candidate"));

    m.def(
        "save_grid",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
           const std::string& path) { save_grid(to_image(image), path); },
        py::arg("image"), py::arg("path"));

    m.def(
        "load_grid", [](const std::string& path) { return to_array(load_grid(path)); },
        py::arg("path"));
}
