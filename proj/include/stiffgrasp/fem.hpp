#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "stiffgrasp/geometry.hpp"
#include "stiffgrasp/util.hpp"

namespace stiffgrasp::fem {

using Vec2 = geom::Vec2;
using Mat2 = Eigen::Matrix2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Linear elastic material, plane strain. Density is interpreted per unit
// extrusion depth, so masses carry kg/m and forces N/m; we write N throughout.
struct Material {
    double young_modulus = 2e5;   // Pa
    double poisson_ratio = 0.3;
    double density = 300.0;       // kg/m^3
    double rayleigh_alpha = 4.0;  // 1/s, mass-proportional damping
    double rayleigh_beta = 1e-3;  // s, stiffness-proportional damping

    void validate() const;
    double lame_mu() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }
    double lame_lambda() const {
        return young_modulus * poisson_ratio /
               ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    }
    // Constrained (oedometric) plane-strain modulus E(1-nu)/((1+nu)(1-2nu)).
    double confined_modulus() const {
        return young_modulus * (1.0 - poisson_ratio) /
               ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    }
};

struct SimConfig {
    double dt = 1e-3;             // s, per frame
    int substeps = 4;
    double cg_tolerance = 1e-6;   // relative residual
    int cg_max_iterations = 500;
    double contact_stiffness = 2e4;  // N/m
    double contact_damping = 5.0;    // N s/m
    double friction_mu = 0.6;
    Vec2 gravity = Vec2::Zero();  // top-down plane: default no gravity

    void validate() const;
};

// Kinematic capsule (gripper jaw). The caller owns the trajectory: set
// `velocity` before each frame; step() advances the segment with it.
struct RigidObstacle {
    Vec2 p0 = Vec2::Zero();
    Vec2 p1 = Vec2::Zero();
    double radius = 0.0025;
    Vec2 velocity = Vec2::Zero();

    void translate(const Vec2& d) { p0 += d; p1 += d; }
    Vec2 midpoint() const { return 0.5 * (p0 + p1); }
};

// Per-vertex fixation flags for kinematic/clamped vertices.
enum : uint8_t { kFixedX = 1, kFixedY = 2, kFixedBoth = 3 };

struct SoftBodyState {
    std::vector<Vec2> rest_positions;
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    std::vector<double> mass;                    // lumped, row-sum
    std::vector<double> mass_alpha;              // lumped alpha-weighted mass (Rayleigh)
    std::vector<uint8_t> kinematic;              // kFixed* bits; velocity is prescribed
    std::vector<std::array<int, 3>> triangles;
    std::vector<Mat2> inv_rest_shape;            // Dm^-1 per element
    std::vector<double> rest_area;               // m^2 per element
    std::vector<Mat6> element_stiffness;         // Ke, SPD up to rigid modes
    std::vector<double> rayleigh_beta;           // per element
    std::vector<Mat2> rotation;                  // lagged co-rotational frame
    std::vector<uint8_t> inverted;               // inversion flag per element

    int num_vertices() const { return static_cast<int>(positions.size()); }
    int num_elements() const { return static_cast<int>(triangles.size()); }
    double inversion_fraction() const;
    Vec2 center_of_mass() const;
    Vec2 linear_momentum() const;
    double max_speed() const;
};

struct StepInfo {
    int cg_iterations = 0;                  // summed over substeps
    std::vector<double> obstacle_normal_force;  // per obstacle, substep average
};

// Builds element data from a mesh and per-region materials. Throws on
// degenerate triangles or a missing region material.
SoftBodyState precompute_elements(const geom::PlanarMesh& mesh,
                                  const std::vector<Material>& materials);

// 2D polar decomposition rotation factor. Requires det(F) > 0.
Mat2 polar_rotation(const Mat2& F);
bool try_polar_rotation(const Mat2& F, Mat2& R);

// Co-rotational elastic forces; refreshes the per-element rotation cache and
// inversion flags. Forces in N (per unit extrusion depth).
std::vector<Vec2> elastic_forces(SoftBodyState& state);

// Penalty contact + regularized Coulomb friction against capsule obstacles.
// If obstacle_normal_force is non-null it receives the summed normal force
// magnitude each obstacle exerts (the jaw reaction reading).
std::vector<Vec2> contact_forces(const SoftBodyState& state,
                                 const std::vector<RigidObstacle>& obstacles,
                                 const SimConfig& cfg,
                                 std::vector<double>* obstacle_normal_force = nullptr);

// One frame of semi-implicit integration (cfg.substeps linearized solves by
// Jacobi-preconditioned CG). Obstacles advance kinematically with their
// velocities. Throws SimError when CG stalls.
StepInfo step(SoftBodyState& state, std::vector<RigidObstacle>& obstacles, const SimConfig& cfg);

// Kinetic + co-rotational elastic energy, rotations evaluated fresh from the
// current configuration.
double total_energy(const SoftBodyState& state);
double kinetic_energy(const SoftBodyState& state);
double elastic_energy(const SoftBodyState& state);
// Elastic energy with the cached (lagged) rotations — the potential whose
// gradient elastic_forces() returns.
double elastic_energy_lagged(const SoftBodyState& state);

// Per-frame position dump: plain-text header, then per frame one float32
// little-endian (x, y) pair per vertex.
class FrameDumper {
public:
    FrameDumper(const std::string& path, int num_vertices, double dt);
    void append(const SoftBodyState& state);
    void close();

private:
    std::string path_;
    std::vector<uint8_t> buffer_;
    int frames_ = 0;
    int num_vertices_;
    double dt_;
};

}  // namespace stiffgrasp::fem
