#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stiffgrasp/geometry.hpp"
#include "stiffgrasp/grasp.hpp"

namespace stiffgrasp::img {

using Vec2 = geom::Vec2;

// Orthographic top-down camera. Pixel (row, col) centers map to world as
// origin + (col * pixel_size, -row * pixel_size): rows run down in world -y.
struct CameraModel {
    double pixel_size = 0.0025;  // m/px
    int width = 96;
    int height = 96;
    Vec2 origin = Vec2::Zero();  // world position of pixel (0,0) center
    double camera_height = 0.5;  // m

    Vec2 pixel_to_world(double row, double col) const {
        return origin + Vec2(col * pixel_size, -row * pixel_size);
    }
    Vec2 world_to_pixel(const Vec2& w) const {  // returns (row, col), continuous
        return Vec2((origin.y() - w.y()) / pixel_size, (w.x() - origin.x()) / pixel_size);
    }
    // Camera with the world origin at the image center.
    static CameraModel centered(int width = 96, int height = 96, double pixel_size = 0.0025,
                                double camera_height = 0.5);
    void validate() const;
};

using Plane = std::vector<float>;  // row-major H*W

struct SceneImage {
    Plane depth;       // m; background = camera height
    Plane stiffness;   // [0,1]; background 0
};

struct GraspMaps {
    Plane quality;     // Q in [0,1]
    Plane cos2;        // cos 2*angle in [-1,1]
    Plane sin2;        // sin 2*angle
    Plane width;       // width / max_opening in [0,1]
};

struct SampleMeta {
    std::string object_id;
    geom::ShapeSpec spec;
    std::vector<double> young_moduli;  // per region, Pa
    uint64_t seed = 0;
    double mesh_edge = 0.0;
    // applied augmentation (identity when untouched)
    double aug_rotation = 0.0;
    double aug_zoom = 1.0;
    double aug_shift_x = 0.0;  // world meters
    double aug_shift_y = 0.0;
};

struct SceneSample {
    CameraModel camera;
    SceneImage image;
    GraspMaps maps;
    SampleMeta meta;
};

// Log-scale normalization of Young's modulus over the canonical sweep
// [2e4, 2e9] Pa, clamped to [0,1]. Throws on E <= 0.
double normalize_stiffness(double young_modulus);

// Rasterizes the mesh footprint at pixel centers: depth = camera height -
// extrusion height, stiffness from the covering region's modulus. Throws when
// the mesh leaves the frame.
SceneImage render_scene(const geom::PlanarMesh& mesh, const std::vector<double>& young_moduli,
                        const CameraModel& camera);

// Paints each positive grasp's center-third rectangle into the four maps;
// overlapping pixels keep the higher quality. Returns the number of grasps
// whose footprint missed the image entirely via `skipped` when non-null.
GraspMaps encode_maps(const std::vector<grasp::GraspRect>& positives, const CameraModel& camera,
                      const grasp::GripperConfig& gripper, int* skipped = nullptr);

// Peak extraction: Gaussian-smooth Q (sigma = 2 px), pick up to k strict local
// maxima (row-major tie order, 2 px suppression), read angle/width at the peak.
std::vector<grasp::GraspRect> decode_grasps(const GraspMaps& maps, const CameraModel& camera,
                                            const grasp::GripperConfig& gripper, int k);

struct AugmentParams {
    double rotation_max = 2.0 * 3.14159265358979323846;  // draw from [0, rotation_max)
    double zoom_min = 0.85;
    double zoom_max = 1.15;
    double shift_frac = 0.10;  // of image extent, per axis

    static AugmentParams identity() { return {0.0, 1.0, 1.0, 0.0}; }
};

// Jointly transforms image and maps by a seeded rotation/zoom/shift; angle and
// width map values are re-encoded under the transform. Retries draws that push
// the footprint out of frame (10 attempts), then throws.
SceneSample augment(const SceneSample& sample, uint64_t seed, const AugmentParams& params);

// Preview-only PGM export (16-bit for depth at 1e4 counts/m, 8-bit for maps).
void write_pgm16(const std::string& path, const Plane& plane, int width, int height,
                 double scale);
void write_pgm8(const std::string& path, const Plane& plane, int width, int height,
                double lo, double hi);

}  // namespace stiffgrasp::img
