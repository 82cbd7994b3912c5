#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stiffgrasp/util.hpp"

namespace stiffgrasp::geom {

using Vec2 = Eigen::Vector2d;

enum class ShapeKind {
    Disk,
    Box,
    RoundedBox,
    Ellipse,
    Capsule,
    LShape,
    TShape,
    AnnulusSector,
    Star,
    Composite,
};

const char* shape_kind_name(ShapeKind k);
ShapeKind shape_kind_from_name(const std::string& name);

// Parametric 2D shape. Size parameters are meters; which ones are used
// depends on `kind`:
//   Disk          a = radius
//   Box           a = width, b = height
//   RoundedBox    a = width, b = height, c = corner radius
//   Ellipse       a = semi-axis x, b = semi-axis y
//   Capsule       a = straight segment length, b = cap radius
//   LShape        a = outer width, b = outer height, c = limb thickness
//   TShape        a = bar width, b = total height, c = limb thickness
//   AnnulusSector a = outer radius, b = inner radius, c = sector span (rad)
//   Star          a = outer radius, b = inner radius, n = point count
//   Composite     regions[] carries the sub-shapes; top-level sizes unused
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Disk;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    int n = 0;
    double height = 0.02;  // extrusion height, meters

    struct Region {
        ShapeKind kind = ShapeKind::Box;
        double a = 0.0, b = 0.0, c = 0.0;
        int n = 0;
        Vec2 offset = Vec2::Zero();
        int region_id = 0;
    };
    std::vector<Region> regions;  // composite only; non-overlapping, connected union

    // Smallest geometric feature; target edge lengths must stay below it.
    double min_feature() const;
    double diameter() const;  // bounding-circle scale estimate
    std::string describe() const;
};

// Triangulated planar body. Extruded by `extrusion_height` for rendering;
// dynamics treat quantities per unit extrusion depth.
struct PlanarMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;   // positively oriented
    std::vector<int> boundary_loop;              // closed, simple, CCW vertex ids
    std::vector<int> vertex_region;              // material-region id per vertex
    std::vector<int> triangle_region;            // material-region id per element
    double extrusion_height = 0.02;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    double total_area() const;
    Vec2 centroid() const;  // area centroid
    int num_regions() const;
};

// Deterministic for fixed (spec, seed). Throws ValidationError on infeasible
// specs; guarantees min triangle quality (inradius/circumradius) >= 0.2.
PlanarMesh generate_shape(const ShapeSpec& spec, double target_edge_length, uint64_t seed);

// Outward unit normals at each boundary_loop vertex (angle bisector of the
// two adjacent edge normals). Indexed like boundary_loop.
std::vector<Vec2> boundary_normals(const PlanarMesh& mesh);

// Exact polygon signed distance to the boundary loop: negative inside,
// positive outside.
double signed_distance(const PlanarMesh& mesh, const Vec2& point);

// Signed distance to an arbitrary closed polygon (CCW).
double polygon_signed_distance(const std::vector<Vec2>& poly, const Vec2& point);
double polygon_area(const std::vector<Vec2>& poly);

// Triangle quality: inradius / circumradius (0.5 for equilateral).
double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c);

// Wavefront-style debug dump: "v x y 0" / "f i j k" (1-based indices).
std::string mesh_to_obj(const PlanarMesh& mesh);

// The 13-entry procedural shape catalog standing in for the primitive object
// set. `jitter_shape` perturbs size parameters by up to +-fraction for variety.
std::vector<ShapeSpec> shape_library();
ShapeSpec jitter_shape(const ShapeSpec& base, double fraction, uint64_t seed);

}  // namespace stiffgrasp::geom
