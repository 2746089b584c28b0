#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "degenlab/app.hpp"
#include "degenlab/cgo.hpp"
#include "degenlab/dtn.hpp"
#include "degenlab/error.hpp"
#include "degenlab/forward.hpp"
#include "degenlab/reconstruct.hpp"

namespace py = pybind11;
using namespace degenlab;
using app::Json;

namespace {

// Sections cross the boundary as JSON text; the Python wrapper does the dumps/loads.
struct Problem {
    std::shared_ptr<const Mesh> mesh;
    WeightSpec weight;
    Potentials pots;
};

Problem problem(const std::string& mesh, const std::string& weight, const std::string& potentials) {
    Problem p;
    p.mesh = std::make_shared<const Mesh>(app::build_mesh(Json::parse(mesh)));
    p.weight = app::parse_weight(Json::parse(weight));
    Point ext{0, 0, 0};
    for (int a = 0; a < p.mesh->dim(); ++a) ext[a] = p.mesh->extent(a);
    p.pots = app::parse_potentials(Json::parse(potentials), ext, p.mesh->dim(), 1);
    return p;
}

Eigen::MatrixXd vertices(const Mesh& m) {
    Eigen::MatrixXd X(m.num_vertices(), m.dim());
    for (int v = 0; v < m.num_vertices(); ++v)
        for (int a = 0; a < m.dim(); ++a) X(v, a) = m.vertex(v)[a];
    return X;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the degenlab solvers";
    m.attr("__version__") = app::kToolVersion;

    static py::exception<Error> err(m, "DegenlabError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object kind = py::str(to_string(e.kind()));
            PyErr_SetObject(err.ptr(), py::make_tuple(py::str(e.what()), kind).ptr());
        }
    });

    m.def("run_config", [](const std::string& config, const std::string& outDir, bool noCache,
                           std::optional<std::uint64_t> seed, std::optional<int> threads) {
        app::RunOptions o;
        o.outDir = outDir;
        o.noCache = noCache;
        o.seed = seed;
        o.threads = threads;
        return app::run(app::parse_config(Json::parse(config)), o).to_json().dump();
    }, py::arg("config"), py::arg("out_dir"), py::arg("no_cache") = false, py::arg("seed") = py::none(),
          py::arg("threads") = py::none());

    m.def("cache_key", [](const std::string& mesh, const std::string& weight, const std::string& pots) {
        return app::cache_key(Json::parse(mesh), Json::parse(weight), Json::parse(pots));
    });

    m.def("solve", [](const std::string& mesh, const std::string& weight, const std::string& pots, double f2,
                      double F0, double lambda) {
        const Problem p = problem(mesh, weight, pots);
        auto sa = make_assembly(p.mesh, p.weight, p.pots, lambda);
        MixedData d;
        d.f2 = VectorXc::Constant(static_cast<int>(sa->sigma2Dofs.size()), f2);
        if (F0 != 0.0) d.F0 = [F0](const Point&) { return cplx(F0); };
        const Solution sol = solve_mixed(sa, d);
        return py::make_tuple(vertices(*p.mesh), sol.u, sol.residual);
    });

    m.def("nearest_eigenvalue", [](const std::string& mesh, const std::string& weight, const std::string& pots,
                                   double lambda) {
        const Problem p = problem(mesh, weight, pots);
        return nearest_eigenvalue(make_assembly(p.mesh, p.weight, p.pots, lambda));
    });

    m.def("dtn", [](const std::string& mesh, const std::string& weight, const std::string& pots) {
        const Problem p = problem(mesh, weight, pots);
        auto sa = make_assembly(p.mesh, p.weight, p.pots, 0.0);
        DtNOptions o;
        o.useCache = false;
        const DtNMatrix L = compute_dtn(sa, make_basis(*sa, BasisKind::NodalHat), o);
        return py::make_tuple(L.entries, L.sigma2Dofs);
    });

    m.def("construct_xi", [](const std::vector<double>& k, double tau, double s, int dim) {
        const CGOParams p = construct_xi(k, tau, s, dim);
        py::dict d;
        d["xi"] = p.xi;
        d["zeta1"] = p.zeta1;
        d["zeta2"] = p.zeta2;
        d["tau"] = p.tau;
        return d;
    });

    m.def("phase_only_pairing", [](const std::string& p1, const std::string& p2, double s,
                                   const std::vector<double>& extents, const std::vector<double>& k) {
        const int dim = static_cast<int>(extents.size());
        Point ext{0, 0, 0};
        for (int a = 0; a < dim; ++a) ext[a] = extents[a];
        return phase_only_pairing(app::parse_potentials(Json::parse(p1), ext, dim, 1),
                                  app::parse_potentials(Json::parse(p2), ext, dim, 1), s, ext, dim, k);
    });
}
