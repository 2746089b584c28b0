#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "degenlab/types.hpp"

namespace degenlab {

enum class BoundaryTag { Sigma1, Sigma2, Rest };

const char* to_string(BoundaryTag tag);

// A boundary facet is the face of `cell` normal to `axis` on side 0 (lower)
// or 1 (upper).
struct Facet {
    int axis = 0;
    int side = 0;
    int cell = 0;
    std::vector<int> vertices;
    BoundaryTag tag = BoundaryTag::Sigma2;
};

class Mesh;
using TagPredicate = std::function<BoundaryTag(const Mesh&, const Facet&)>;

// Tensor-product box [0,L_0] x ... x [0,L_{d-1}] with the last axis vertical.
// Horizontal spacing is uniform; vertical layer heights shrink geometrically
// toward x_d = 0 by `gradingRatio` per layer.
class Mesh {
public:
    int dim() const { return dim_; }
    int cells_along(int axis) const { return n_[axis]; }
    const std::vector<double>& coords(int axis) const { return coords_[axis]; }
    double extent(int axis) const { return coords_[axis].back(); }
    double grading_ratio() const { return ratio_; }
    const std::string& tag_predicate_name() const { return tagName_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_cells() const { return numCells_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const Point& vertex(int v) const { return vertices_[v]; }
    const std::vector<Facet>& facets() const { return facets_; }

    int vertex_index(const std::array<int, 3>& ijk) const;
    std::array<int, 3> vertex_ijk(int v) const;
    std::array<int, 3> cell_ijk(int c) const;
    int cell_index(const std::array<int, 3>& ijk) const;
    // Vertices of a cell in lexicographic local order (axis 0 fastest).
    std::vector<int> cell_vertices(int c) const;
    // Lower/upper corner of a cell.
    Point cell_lower(int c) const;
    Point cell_upper(int c) const;
    double cell_volume(int c) const;
    // Vertical layer heights, bottom first.
    std::vector<double> layer_heights() const;
    double max_spacing(int axis) const;

    // Vertex sets derived from facet tags (sorted, unique).
    std::vector<int> tagged_vertices(BoundaryTag tag) const;
    std::vector<int> boundary_vertices() const;
    std::vector<bool> boundary_mask() const;

    std::size_t count_tag(BoundaryTag tag) const;
    Point facet_centroid(const Facet& f) const;

    void retag(const TagPredicate& pred, const std::string& name);

    friend Mesh build_graded_box(const std::vector<double>&, const std::vector<int>&, double);
    friend Mesh mesh_from_coords(int, const std::array<std::vector<double>, 3>&, double);

private:
    void finalize();

    int dim_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<int, 3> nv_{1, 1, 1};
    std::array<std::vector<double>, 3> coords_;
    double ratio_ = 1.0;
    int numCells_ = 0;
    std::vector<Point> vertices_;
    std::vector<Facet> facets_;
    std::string tagName_ = "default";
};

Mesh build_graded_box(const std::vector<double>& lengths, const std::vector<int>& cellsPerAxis,
                      double gradingRatio);

// Rebuild a mesh from explicit per-axis coordinates (used when reading containers).
Mesh mesh_from_coords(int dim, const std::array<std::vector<double>, 3>& coords, double ratio);

// Named tag predicates; "default" puts the bottom face in Sigma1 and every
// other face in Sigma2.
TagPredicate tag_predicate(const std::string& name);
void apply_named_tags(Mesh& mesh, const std::string& name);

}  // namespace degenlab
