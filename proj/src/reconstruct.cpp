#include "degenlab/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "degenlab/dtn.hpp"
#include "degenlab/error.hpp"
#include "degenlab/io.hpp"
#include "degenlab/parallel.hpp"
#include "degenlab/quadrature.hpp"

namespace degenlab {

const char* to_string(SampleMode m) { return m == SampleMode::ExactCGO ? "ExactCGO" : "PhaseOnly"; }

SampleMode sample_mode_from_string(const std::string& name) {
    if (name == "ExactCGO") return SampleMode::ExactCGO;
    if (name == "PhaseOnly") return SampleMode::PhaseOnly;
    throw Error(ErrorKind::ConfigInvalid, "unknown sample mode '" + name + "'");
}

int FrequencyGrid::size() const {
    int m = 1;
    for (int a = 0; a < dim; ++a) m *= n;
    return m;
}

double FrequencyGrid::step(int axis) const { return n > 1 ? 2.0 * kmax[axis] / (n - 1) : 0.0; }

double FrequencyGrid::value(int axis, int i) const { return (i - (n - 1) / 2) * step(axis); }

std::array<int, 3> FrequencyGrid::index(int flat) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        ijk[a] = flat % n;
        flat /= n;
    }
    return ijk;
}

std::vector<double> FrequencyGrid::k_at(int flat) const {
    const auto ijk = index(flat);
    std::vector<double> k(dim);
    for (int a = 0; a < dim; ++a) k[a] = value(a, ijk[a]);
    return k;
}

FrequencyGrid default_grid(int dim, double bandwidth, double verticalBandwidth, int n) {
    if (dim < 2 || dim > 3) throw Error(ErrorKind::InvalidArgument, "dimension must be 2 or 3");
    if (n < 3 || n % 2 == 0) throw Error(ErrorKind::InvalidArgument, "frequency grid needs an odd number >= 3 of points");
    if (!(bandwidth > 0.0) || !(verticalBandwidth > 0.0))
        throw Error(ErrorKind::InvalidArgument, "bandwidths must be positive");
    FrequencyGrid g;
    g.dim = dim;
    g.n = n;
    for (int a = 0; a < dim - 1; ++a) g.kmax[a] = 1.5 * bandwidth;
    g.kmax[dim - 1] = 1.5 * verticalBandwidth;
    return g;
}

double FrequencySamples::hermitian_defect() const {
    double worst = 0.0;
    const int m = grid.size();
    for (int f = 0; f < m; ++f) {
        // the mirrored flat index is m - 1 - f on a symmetric grid
        worst = std::max(worst, std::abs(values[m - 1 - f] - std::conj(values[f])));
    }
    return worst;
}

namespace {

// Tensor data with axis 0 fastest.
struct Tensor {
    std::array<int, 3> dims{1, 1, 1};
    std::vector<cplx> data;
};

// out = E applied along `axis`; E is (m x dims[axis]).
Tensor apply_axis(const Tensor& in, int axis, const MatrixXc& E) {
    Tensor out;
    out.dims = in.dims;
    out.dims[axis] = static_cast<int>(E.rows());
    out.data.assign(static_cast<std::size_t>(out.dims[0]) * out.dims[1] * out.dims[2], 0.0);
    const int d0 = in.dims[0], d1 = in.dims[1], d2 = in.dims[2];
    using Map = Eigen::Map<MatrixXc>;
    using CMap = Eigen::Map<const MatrixXc>;
    if (axis == 0) {
        Map(out.data.data(), out.dims[0], d1 * d2) = E * CMap(in.data.data(), d0, d1 * d2);
    } else if (axis == 2) {
        Map(out.data.data(), d0 * d1, out.dims[2]) = CMap(in.data.data(), d0 * d1, d2) * E.transpose();
    } else {
        for (int l = 0; l < d2; ++l)
            Map(out.data.data() + static_cast<std::size_t>(l) * d0 * out.dims[1], d0, out.dims[1]) =
                CMap(in.data.data() + static_cast<std::size_t>(l) * d0 * d1, d0, d1) * E.transpose();
    }
    return out;
}

Rule1D composite(double a, double b, int panels, int points) {
    Rule1D r;
    for (int p = 0; p < panels; ++p) {
        const Rule1D g = gauss_legendre(points, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels);
        r.nodes.insert(r.nodes.end(), g.nodes.begin(), g.nodes.end());
        r.weights.insert(r.weights.end(), g.weights.begin(), g.weights.end());
    }
    return r;
}

int panels_for(double length, double rate, const TransformQuadrature& q) {
    const double need = std::ceil(length * rate / kPi);
    if (need > q.maxPanels)
        throw Error(ErrorKind::UnresolvedOscillation,
                    "phase-only quadrature would need " + std::to_string(static_cast<long long>(need)) + " panels");
    return std::max(q.panels, static_cast<int>(need));
}

// Vertical rule on [0,H] with weights including x^{1-2s}.
Rule1D vertical_rule(double H, double s, double rate, const TransformQuadrature& q) {
    const double beta = 1.0 - 2.0 * s;
    const int panels = panels_for(H, rate, q);
    const double first = H / panels;
    Rule1D r;
    double top = first;
    const double ratio = 0.5;
    for (int j = 0; j < q.graded; ++j) {
        const double lo = top * ratio;
        const Rule1D g = gauss_legendre(q.points, lo, top);
        for (int i = 0; i < q.points; ++i) {
            r.nodes.push_back(g.nodes[i]);
            r.weights.push_back(g.weights[i] * std::pow(g.nodes[i], beta));
        }
        top = lo;
    }
    const Rule1D g0 = gauss_jacobi_left(q.points, beta, 0.0, top);
    r.nodes.insert(r.nodes.end(), g0.nodes.begin(), g0.nodes.end());
    r.weights.insert(r.weights.end(), g0.weights.begin(), g0.weights.end());
    const Rule1D rest = composite(first, H, panels - 1, q.points);
    for (std::size_t i = 0; i < rest.nodes.size(); ++i) {
        r.nodes.push_back(rest.nodes[i]);
        r.weights.push_back(rest.weights[i] * std::pow(rest.nodes[i], beta));
    }
    return r;
}

double vertical_phase(double x, double s) { return s == 0.5 ? x : std::pow(x, 2.0 * s); }

std::string digest(int dim, double s, const Point& ext, const FrequencyGrid& g, SampleMode mode, double tau) {
    Sha256 h;
    h.update(std::string("degenlab-samples-v1"));
    h.update_pod(dim);
    h.update_pod(s);
    h.update(ext.data(), sizeof(ext));
    h.update_pod(g.n);
    h.update(g.kmax.data(), sizeof(g.kmax));
    h.update_pod(static_cast<int>(mode));
    h.update_pod(tau);
    return h.hex();
}

}  // namespace

FrequencySamples sample_phase_only(const Potentials& p1, const Potentials& p2, double s, const Point& extents,
                                   int dim, const FrequencyGrid& grid, const TransformQuadrature& quad,
                                   int threads) {
    if (dim < 2 || dim > 3 || grid.dim != dim) throw Error(ErrorKind::InvalidArgument, "grid and domain dimensions differ");
    if (!(s >= 0.5 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in [1/2, 1)");
    for (int a = 0; a < dim; ++a)
        if (!(extents[a] > 0.0)) throw Error(ErrorKind::NonPositiveExtent, "box extents must be positive");
    const int vd = dim - 1;
    const double H = extents[vd];
    // horizontal rules and their transform matrices
    std::vector<Rule1D> rules(dim);
    std::vector<MatrixXc> E(dim);
    for (int a = 0; a < vd; ++a) {
        rules[a] = composite(0.0, extents[a], panels_for(extents[a], grid.kmax[a], quad), quad.points);
        E[a].resize(grid.n, static_cast<int>(rules[a].nodes.size()));
        for (int j = 0; j < grid.n; ++j)
            for (std::size_t i = 0; i < rules[a].nodes.size(); ++i)
                E[a](j, static_cast<int>(i)) = rules[a].weights[i] * std::polar(1.0, grid.value(a, j) * rules[a].nodes[i]);
    }
    // d/dx of k_d x^{2s} is at most 2s k_d H^{2s-1} on [0,H]
    const double vrate = grid.kmax[vd] * 2.0 * s * std::pow(H, 2.0 * s - 1.0);
    rules[vd] = vertical_rule(H, s, vrate, quad);
    E[vd].resize(grid.n, static_cast<int>(rules[vd].nodes.size()));
    for (int j = 0; j < grid.n; ++j)
        for (std::size_t i = 0; i < rules[vd].nodes.size(); ++i)
            E[vd](j, static_cast<int>(i)) =
                rules[vd].weights[i] * std::polar(1.0, grid.value(vd, j) * vertical_phase(rules[vd].nodes[i], s));

    FrequencySamples out;
    out.grid = grid;
    out.mode = SampleMode::PhaseOnly;
    out.s = s;
    out.extents = extents;
    out.geometryDigest = digest(dim, s, extents, grid, out.mode, 0.0);
    out.values.assign(grid.size(), 0.0);

    if (p1.has_V() || p2.has_V()) {
        Tensor t;
        for (int a = 0; a < dim; ++a) t.dims[a] = static_cast<int>(rules[a].nodes.size());
        const int total = t.dims[0] * t.dims[1] * t.dims[2];
        t.data.resize(total);
        parallel_chunks(total, threads, [&](int, int b, int e) {
            for (int f = b; f < e; ++f) {
                int r = f;
                Point x{0, 0, 0};
                for (int a = 0; a < dim; ++a) {
                    x[a] = rules[a].nodes[r % t.dims[a]];
                    r /= t.dims[a];
                }
                t.data[f] = p1.V_at(x) - p2.V_at(x);
            }
        });
        // reduce the longest (vertical) axis first
        t = apply_axis(t, vd, E[vd]);
        for (int a = 0; a < vd; ++a) t = apply_axis(t, a, E[a]);
        for (int f = 0; f < grid.size(); ++f) out.values[f] += t.data[f];
    }
    if (p1.has_q() || p2.has_q()) {
        Tensor t;
        for (int a = 0; a < vd; ++a) t.dims[a] = static_cast<int>(rules[a].nodes.size());
        t.data.resize(static_cast<std::size_t>(t.dims[0]) * t.dims[1] * t.dims[2]);
        for (std::size_t f = 0; f < t.data.size(); ++f) {
            int r = static_cast<int>(f);
            Point x{0, 0, 0};
            for (int a = 0; a < vd; ++a) {
                x[a] = rules[a].nodes[r % t.dims[a]];
                r /= t.dims[a];
            }
            t.data[f] = p1.q_at(x) - p2.q_at(x);
        }
        for (int a = 0; a < vd; ++a) t = apply_axis(t, a, E[a]);
        int hsize = 1;
        for (int a = 0; a < vd; ++a) hsize *= grid.n;
        for (int f = 0; f < grid.size(); ++f) out.values[f] += t.data[f % hsize];
    }
    return out;
}

cplx phase_only_pairing(const Potentials& p1, const Potentials& p2, double s, const Point& extents, int dim,
                        const std::vector<double>& k, const TransformQuadrature& quad) {
    if (static_cast<int>(k.size()) != dim) throw Error(ErrorKind::InvalidArgument, "frequency has the wrong length");
    FrequencyGrid g;
    g.dim = dim;
    g.n = 3;
    int flat = 0, stride = 1;
    for (int a = 0; a < dim; ++a) {
        g.kmax[a] = std::abs(k[a]);
        flat += (k[a] > 0.0 ? 2 : k[a] < 0.0 ? 0 : 1) * stride;
        stride *= 3;
    }
    return sample_phase_only(p1, p2, s, extents, dim, g, quad).values[flat];
}

namespace {

RealField negated(const RealField& f) {
    if (!f) return {};
    return [f](const Point& x) { return -f(x); };
}

}  // namespace

ExactCGOPairing exact_cgo_pairing(std::shared_ptr<const Mesh> mesh, double s, const Potentials& p1,
                                  const Potentials& p2, const std::vector<double>& k, double tau,
                                  const ExactCGOOptions& opts) {
    if (p1.has_A() || p2.has_A())
        throw Error(ErrorKind::InvalidArgument, "ExactCGO pairing is implemented for A = 0 only");
    const int dim = mesh->dim();
    if (static_cast<int>(k.size()) != dim) throw Error(ErrorKind::InvalidArgument, "frequency has the wrong length");
    std::vector<double> half(k), mhalf(k);
    for (int a = 0; a < dim; ++a) {
        half[a] = 0.5 * k[a];
        mhalf[a] = -0.5 * k[a];
    }
    const CGOParams c1 = construct_xi(half, tau, s, dim);
    CGOParams c2 = c1;
    c2.k = mhalf;
    for (int a = 0; a < dim; ++a) {
        c2.zeta1[a] = -c1.zeta1[a];
        c2.xi[a] = cplx(-c1.xi[a].real(), c1.xi[a].imag());
    }
    const RemainderResult r1 = solve_remainder(c1, negated(p1.V), negated(p1.q), mesh, opts.remainder);
    const RemainderResult r2 = solve_remainder(c2, negated(p2.V), negated(p2.q), mesh, opts.remainder);
    const VectorXc u1 = cgo_nodal(*mesh, c1, r1.r);
    const VectorXc u2 = cgo_nodal(*mesh, c2, r2.r);
    const WeightSpec ws{s, WeightMode::Vertical};
    const ForwardSolver s1(make_assembly(mesh, ws, p1, 0.0), opts.solver);
    const ForwardSolver s2(make_assembly(mesh, ws, p2, 0.0), opts.solver);
    const auto& dofs = s1.assembly().sigma2Dofs;
    VectorXc f1(static_cast<int>(dofs.size())), f2(static_cast<int>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        f1(static_cast<int>(i)) = u1(dofs[i]);
        f2(static_cast<int>(i)) = u2(dofs[i]);
    }
    ExactCGOPairing out;
    out.value = dtn_difference_pairing(s1, s2, f1, f2);
    out.remainderResidual = std::max(r1.residual, r2.residual);
    return out;
}

FrequencySamples sample_pairing(std::shared_ptr<const Mesh> mesh, double s, const Potentials& p1,
                                const Potentials& p2, const FrequencyGrid& grid, SampleMode mode, double tau,
                                const ExactCGOOptions& opts, int threads) {
    Point ext{0, 0, 0};
    for (int a = 0; a < mesh->dim(); ++a) ext[a] = mesh->extent(a);
    if (mode == SampleMode::PhaseOnly) return sample_phase_only(p1, p2, s, ext, mesh->dim(), grid, {}, threads);
    if (grid.dim != mesh->dim()) throw Error(ErrorKind::InvalidArgument, "grid and mesh dimensions differ");
    FrequencySamples out;
    out.grid = grid;
    out.mode = mode;
    out.s = s;
    out.tau = tau;
    out.extents = ext;
    out.geometryDigest = digest(mesh->dim(), s, ext, grid, mode, tau);
    out.values.assign(grid.size(), 0.0);
    parallel_chunks(grid.size(), threads, [&](int, int b, int e) {
        for (int f = b; f < e; ++f) out.values[f] = exact_cgo_pairing(mesh, s, p1, p2, grid.k_at(f), tau, opts).value;
    });
    return out;
}

namespace {

std::vector<double> centres(double L, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = (i + 0.5) * L / n;
    return x;
}

// Inverse transform matrix (Delta k / 2 pi) e^{-i k y} for one axis.
MatrixXc inverse_matrix(const FrequencyGrid& g, int axis, const std::vector<double>& y) {
    MatrixXc E(static_cast<int>(y.size()), g.n);
    const double c = g.step(axis) / (2.0 * kPi);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (int j = 0; j < g.n; ++j) E(static_cast<int>(i), j) = c * std::polar(1.0, -g.value(axis, j) * y[i]);
    return E;
}

void check_grid(const FrequencySamples& smp, const ReconstructOptions& opts, double verticalExtent) {
    const FrequencyGrid& g = smp.grid;
    for (int a = 0; a < g.dim; ++a) {
        const double L = a == g.dim - 1 ? verticalExtent : smp.extents[a];
        if (!(g.step(a) > 0.0)) throw Error(ErrorKind::GridTooCoarse, "frequency grid has zero extent");
        const double period = 2.0 * kPi / g.step(a);
        if (period < L)
            throw Error(ErrorKind::GridTooCoarse, "frequency step aliases the domain on axis " + std::to_string(a));
        if (opts.bandwidth > 0.0 && a < g.dim - 1 && g.kmax[a] < opts.bandwidth)
            throw Error(ErrorKind::GridTooCoarse, "kmax below the declared bandwidth on axis " + std::to_string(a));
    }
}

double imag_residue(const std::vector<cplx>& v) {
    double re = 0.0, im = 0.0;
    for (const auto& z : v) {
        re = std::max(re, std::abs(z.real()));
        im = std::max(im, std::abs(z.imag()));
    }
    return re > 0.0 ? im / re : im;
}

Tensor samples_tensor(const FrequencySamples& smp, const std::vector<cplx>& values) {
    Tensor t;
    for (int a = 0; a < smp.grid.dim; ++a) t.dims[a] = smp.grid.n;
    t.data = values;
    return t;
}

Reconstruction skeleton(const FrequencySamples& smp, const ReconstructOptions& opts) {
    if (opts.gridPoints < 2) throw Error(ErrorKind::InvalidArgument, "need at least two evaluation points per axis");
    if (static_cast<int>(smp.values.size()) != smp.grid.size())
        throw Error(ErrorKind::InvalidArgument, "sample count does not match the grid");
    Reconstruction r;
    r.dim = smp.grid.dim;
    r.extents = smp.extents;
    for (int a = 0; a < r.dim; ++a) r.axes.push_back(centres(smp.extents[a], opts.gridPoints));
    return r;
}

}  // namespace

Reconstruction recover_V_fixed_q(const FrequencySamples& smp, const ReconstructOptions& opts) {
    if (smp.s != 0.5) throw Error(ErrorKind::InvalidArgument, "fixed-q recovery needs s = 1/2");
    Reconstruction r = skeleton(smp, opts);
    check_grid(smp, opts, smp.extents[r.dim - 1]);
    Tensor t = samples_tensor(smp, smp.values);
    for (int a = 0; a < r.dim; ++a) t = apply_axis(t, a, inverse_matrix(smp.grid, a, r.axes[a]));
    r.imagResidueV = imag_residue(t.data);
    r.V.resize(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) r.V[i] = t.data[i].real();
    return r;
}

Reconstruction recover_V_and_q(const FrequencySamples& smp, const ReconstructOptions& opts) {
    const double s = smp.s;
    if (!(s >= 0.5 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in [1/2, 1)");
    Reconstruction r = skeleton(smp, opts);
    const FrequencyGrid& g = smp.grid;
    const int vd = r.dim - 1;
    const double H = smp.extents[vd];
    check_grid(smp, opts, std::pow(H, 2.0 * s));
    std::vector<int> band;
    for (int j = 0; j < g.n; ++j)
        if (std::abs(g.value(vd, j)) >= opts.bandFraction * g.kmax[vd] - 1e-12) band.push_back(j);
    if (band.size() < 2) throw Error(ErrorKind::BandTooNarrow, "vertical band has fewer than two samples");
    int hsize = 1;
    for (int a = 0; a < vd; ++a) hsize *= g.n;
    double tmax = 0.0;
    for (const auto& v : smp.values) tmax = std::max(tmax, std::abs(v));
    std::vector<cplx> qhat(hsize, 0.0);
    double leak = 0.0, qpeak = 0.0;
    for (int h = 0; h < hsize; ++h) {
        for (int j : band) qhat[h] += smp.values[h + hsize * j];
        qhat[h] /= static_cast<double>(band.size());
        double var = 0.0;
        for (int j : band) var += std::norm(smp.values[h + hsize * j] - qhat[h]);
        leak = std::max(leak, std::sqrt(var / band.size()));
        qpeak = std::max(qpeak, std::abs(qhat[h]));
    }
    r.leakage = tmax > 0.0 ? leak / tmax : 0.0;
    r.qHatPeak = tmax > 0.0 ? qpeak / tmax : 0.0;
    if (r.leakage > opts.leakageTolerance)
        throw Error(ErrorKind::BandTooNarrow,
                    "bulk part still varies across the averaging band (" + std::to_string(r.leakage) + ")");
    // q on Sigma1
    {
        Tensor t;
        for (int a = 0; a < vd; ++a) t.dims[a] = g.n;
        t.data = qhat;
        for (int a = 0; a < vd; ++a) t = apply_axis(t, a, inverse_matrix(g, a, r.axes[a]));
        r.imagResidueQ = imag_residue(t.data);
        r.q.resize(t.data.size());
        for (std::size_t i = 0; i < t.data.size(); ++i) r.q[i] = t.data[i].real();
    }
    // bulk density on the y grid
    std::vector<cplx> bulk(smp.values);
    for (int f = 0; f < g.size(); ++f) bulk[f] -= qhat[f % hsize];
    std::vector<double> y(r.axes[vd].size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::pow(r.axes[vd][i], 2.0 * s);
    Tensor t = samples_tensor(smp, bulk);
    t = apply_axis(t, vd, inverse_matrix(g, vd, y));
    for (int a = 0; a < vd; ++a) t = apply_axis(t, a, inverse_matrix(g, a, r.axes[a]));
    r.imagResidueV = imag_residue(t.data);
    r.V.resize(t.data.size());
    const int n = static_cast<int>(r.axes[0].size());
    int inner = 1;
    for (int a = 0; a < vd; ++a) inner *= n;
    for (std::size_t i = 0; i < t.data.size(); ++i) {
        const double yd = y[i / inner];
        // density (V / 2s) y^{1/s-2}
        r.V[i] = t.data[i].real() * 2.0 * s * std::pow(yd, 2.0 - 1.0 / s);
    }
    return r;
}

namespace {

double interpolate(const std::vector<std::vector<double>>& axes, const std::vector<double>& vals, int dims,
                   const Point& x, const Point& ext) {
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int a = 0; a < dims; ++a) {
        if (x[a] < 0.0 || x[a] > ext[a]) return 0.0;
        const auto& ax = axes[a];
        const int n = static_cast<int>(ax.size());
        const double h = ax[1] - ax[0];
        double u = (x[a] - ax[0]) / h;
        u = std::clamp(u, 0.0, static_cast<double>(n - 1));
        base[a] = std::min(static_cast<int>(u), n - 2);
        frac[a] = u - base[a];
    }
    double v = 0.0;
    for (int c = 0; c < (1 << dims); ++c) {
        double w = 1.0;
        int flat = 0, stride = 1;
        for (int a = 0; a < dims; ++a) {
            const int bit = (c >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            flat += (base[a] + bit) * stride;
            stride *= static_cast<int>(axes[a].size());
        }
        v += w * vals[flat];
    }
    return v;
}

}  // namespace

RealField Reconstruction::V_field() const {
    const auto ax = axes;
    const auto vals = V;
    const int d = dim;
    const Point ext = extents;
    return [ax, vals, d, ext](const Point& x) { return interpolate(ax, vals, d, x, ext); };
}

RealField Reconstruction::q_field() const {
    if (q.empty()) return {};
    const std::vector<std::vector<double>> ax(axes.begin(), axes.end() - 1);
    const auto vals = q;
    const int d = dim - 1;
    const Point ext = extents;
    return [ax, vals, d, ext](const Point& x) { return interpolate(ax, vals, d, x, ext); };
}

ReconstructionError reconstruction_error(const Reconstruction& r, const RealField& dV, const RealField& dq) {
    ReconstructionError e;
    const int n = static_cast<int>(r.axes[0].size());
    const int vd = r.dim - 1;
    auto point = [&](int flat, int dims) {
        Point x{0, 0, 0};
        for (int a = 0; a < dims; ++a) {
            x[a] = r.axes[a][flat % n];
            flat /= n;
        }
        return x;
    };
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.V.size(); ++i) {
        const double t = dV ? dV(point(static_cast<int>(i), r.dim)) : 0.0;
        num += (r.V[i] - t) * (r.V[i] - t);
        den += t * t;
    }
    e.V = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / std::max<std::size_t>(r.V.size(), 1));
    num = den = 0.0;
    int hsize = 1;
    for (int a = 0; a < vd; ++a) hsize *= n;
    for (int i = 0; i < hsize; ++i) {
        const double t = dq ? dq(point(i, vd)) : 0.0;
        const double v = r.q.empty() ? 0.0 : r.q[i];
        num += (v - t) * (v - t);
        den += t * t;
    }
    e.q = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / hsize);
    return e;
}

double round_trip_residual(const Reconstruction& r, const FrequencySamples& smp, const TransformQuadrature& quad) {
    Potentials p;
    p.V = r.V_field();
    p.q = r.q_field();
    const FrequencySamples re = sample_phase_only(p, Potentials{}, smp.s, smp.extents, r.dim, smp.grid, quad);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < re.values.size(); ++i) {
        num += std::norm(re.values[i] - smp.values[i]);
        den += std::norm(smp.values[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace degenlab
