#include "degenlab/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "degenlab/error.hpp"

namespace degenlab {

const char* to_string(BoundaryTag tag) {
    switch (tag) {
    case BoundaryTag::Sigma1: return "Sigma1";
    case BoundaryTag::Sigma2: return "Sigma2";
    case BoundaryTag::Rest: return "Rest";
    }
    return "?";
}

int Mesh::vertex_index(const std::array<int, 3>& ijk) const {
    return ijk[0] + nv_[0] * (ijk[1] + nv_[1] * ijk[2]);
}

std::array<int, 3> Mesh::vertex_ijk(int v) const {
    std::array<int, 3> ijk{0, 0, 0};
    ijk[0] = v % nv_[0];
    v /= nv_[0];
    ijk[1] = v % nv_[1];
    ijk[2] = v / nv_[1];
    return ijk;
}

int Mesh::cell_index(const std::array<int, 3>& ijk) const {
    return ijk[0] + n_[0] * (ijk[1] + n_[1] * ijk[2]);
}

std::array<int, 3> Mesh::cell_ijk(int c) const {
    std::array<int, 3> ijk{0, 0, 0};
    ijk[0] = c % n_[0];
    c /= n_[0];
    ijk[1] = c % n_[1];
    ijk[2] = c / n_[1];
    return ijk;
}

std::vector<int> Mesh::cell_vertices(int c) const {
    const auto ijk = cell_ijk(c);
    const int nloc = 1 << dim_;
    std::vector<int> out(nloc);
    for (int l = 0; l < nloc; ++l) {
        std::array<int, 3> v = ijk;
        for (int a = 0; a < dim_; ++a) v[a] += (l >> a) & 1;
        out[l] = vertex_index(v);
    }
    return out;
}

Point Mesh::cell_lower(int c) const {
    const auto ijk = cell_ijk(c);
    Point p{0, 0, 0};
    for (int a = 0; a < dim_; ++a) p[a] = coords_[a][ijk[a]];
    return p;
}

Point Mesh::cell_upper(int c) const {
    const auto ijk = cell_ijk(c);
    Point p{0, 0, 0};
    for (int a = 0; a < dim_; ++a) p[a] = coords_[a][ijk[a] + 1];
    return p;
}

double Mesh::cell_volume(int c) const {
    const Point lo = cell_lower(c), hi = cell_upper(c);
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= hi[a] - lo[a];
    return v;
}

std::vector<double> Mesh::layer_heights() const {
    const auto& z = coords_[dim_ - 1];
    std::vector<double> h(z.size() - 1);
    for (std::size_t j = 0; j + 1 < z.size(); ++j) h[j] = z[j + 1] - z[j];
    return h;
}

double Mesh::max_spacing(int axis) const {
    const auto& x = coords_[axis];
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) m = std::max(m, x[j + 1] - x[j]);
    return m;
}

std::vector<int> Mesh::tagged_vertices(BoundaryTag tag) const {
    std::vector<int> out;
    for (const auto& f : facets_)
        if (f.tag == tag) out.insert(out.end(), f.vertices.begin(), f.vertices.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> Mesh::boundary_vertices() const {
    std::vector<int> out;
    for (const auto& f : facets_) out.insert(out.end(), f.vertices.begin(), f.vertices.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<bool> Mesh::boundary_mask() const {
    std::vector<bool> m(vertices_.size(), false);
    for (const auto& f : facets_)
        for (int v : f.vertices) m[v] = true;
    return m;
}

std::size_t Mesh::count_tag(BoundaryTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(facets_.begin(), facets_.end(), [tag](const Facet& f) { return f.tag == tag; }));
}

Point Mesh::facet_centroid(const Facet& f) const {
    Point p{0, 0, 0};
    for (int v : f.vertices)
        for (int a = 0; a < 3; ++a) p[a] += vertices_[v][a];
    for (int a = 0; a < 3; ++a) p[a] /= static_cast<double>(f.vertices.size());
    return p;
}

void Mesh::retag(const TagPredicate& pred, const std::string& name) {
    for (auto& f : facets_) f.tag = pred(*this, f);
    tagName_ = name;
}

void Mesh::finalize() {
    numCells_ = 1;
    for (int a = 0; a < dim_; ++a) numCells_ *= n_[a];
    for (int a = 0; a < 3; ++a) nv_[a] = static_cast<int>(coords_[a].size());
    const int nv = nv_[0] * nv_[1] * nv_[2];
    vertices_.assign(nv, Point{0, 0, 0});
    for (int v = 0; v < nv; ++v) {
        const auto ijk = vertex_ijk(v);
        for (int a = 0; a < dim_; ++a) vertices_[v][a] = coords_[a][ijk[a]];
    }
    facets_.clear();
    for (int axis = 0; axis < dim_; ++axis) {
        for (int side = 0; side < 2; ++side) {
            for (int c = 0; c < numCells_; ++c) {
                const auto ijk = cell_ijk(c);
                if (ijk[axis] != (side == 0 ? 0 : n_[axis] - 1)) continue;
                Facet f;
                f.axis = axis;
                f.side = side;
                f.cell = c;
                const auto cv = cell_vertices(c);
                for (int l = 0; l < static_cast<int>(cv.size()); ++l)
                    if (((l >> axis) & 1) == side) f.vertices.push_back(cv[l]);
                facets_.push_back(std::move(f));
            }
        }
    }
    retag(tag_predicate("default"), "default");
}

Mesh build_graded_box(const std::vector<double>& lengths, const std::vector<int>& cellsPerAxis,
                      double gradingRatio) {
    const int dim = static_cast<int>(lengths.size());
    if (dim < 2 || dim > 3 || cellsPerAxis.size() != lengths.size())
        throw Error(ErrorKind::InvalidArgument, "box must be 2D or 3D with one cell count per axis");
    for (double L : lengths)
        if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorKind::NonPositiveExtent, "box extents must be positive");
    for (int n : cellsPerAxis)
        if (n < 2) throw Error(ErrorKind::TooFewCells, "need at least 2 cells per axis");
    if (!(gradingRatio > 0.0 && gradingRatio <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "grading ratio must lie in (0,1]");

    std::array<std::vector<double>, 3> coords;
    for (int a = 0; a < dim; ++a) {
        const int n = cellsPerAxis[a];
        coords[a].resize(n + 1);
        if (a < dim - 1 || gradingRatio == 1.0) {
            for (int j = 0; j <= n; ++j) coords[a][j] = lengths[a] * j / n;
        } else {
            // heights bottom-up: h_top * r^(n-1-j)
            double sum = 0.0;
            std::vector<double> h(n);
            for (int j = 0; j < n; ++j) {
                h[j] = std::pow(gradingRatio, n - 1 - j);
                sum += h[j];
            }
            coords[a][0] = 0.0;
            for (int j = 0; j < n; ++j) coords[a][j + 1] = coords[a][j] + lengths[a] * h[j] / sum;
            coords[a][n] = lengths[a];
        }
    }
    return mesh_from_coords(dim, coords, gradingRatio);
}

Mesh mesh_from_coords(int dim, const std::array<std::vector<double>, 3>& coords, double ratio) {
    Mesh m;
    m.dim_ = dim;
    m.ratio_ = ratio;
    for (int a = 0; a < 3; ++a) {
        if (a < dim) {
            m.coords_[a] = coords[a];
            m.n_[a] = static_cast<int>(coords[a].size()) - 1;
        } else {
            m.coords_[a] = {0.0};
            m.n_[a] = 1;
        }
    }
    m.finalize();
    return m;
}

TagPredicate tag_predicate(const std::string& name) {
    if (name == "default") {
        return [](const Mesh& m, const Facet& f) {
            return (f.axis == m.dim() - 1 && f.side == 0) ? BoundaryTag::Sigma1 : BoundaryTag::Sigma2;
        };
    }
    if (name == "all-sigma2") {
        return [](const Mesh&, const Facet&) { return BoundaryTag::Sigma2; };
    }
    if (name == "top-sigma2") {
        // bottom Robin, top accessible, sides grounded
        return [](const Mesh& m, const Facet& f) {
            if (f.axis == m.dim() - 1) return f.side == 0 ? BoundaryTag::Sigma1 : BoundaryTag::Sigma2;
            return BoundaryTag::Rest;
        };
    }
    throw Error(ErrorKind::UnknownTag, "unknown tag predicate '" + name + "'");
}

void apply_named_tags(Mesh& mesh, const std::string& name) { mesh.retag(tag_predicate(name), name); }

}  // namespace degenlab
