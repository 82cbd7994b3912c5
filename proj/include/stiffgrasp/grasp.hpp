#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stiffgrasp/fem.hpp"
#include "stiffgrasp/geometry.hpp"

namespace stiffgrasp::grasp {

using Vec2 = geom::Vec2;

// Parallel-jaw grasp as a rectangle: center, axis angle (pi-periodic), jaw
// separation at pre-grasp, and the shake-test quality once labeled.
struct GraspRect {
    Vec2 center = Vec2::Zero();
    double angle = 0.0;   // [0, pi)
    double width = 0.0;   // m
    double quality = 0.0; // [0, 1]

    Vec2 axis() const { return {std::cos(angle), std::sin(angle)}; }
    Vec2 lateral() const { return {-std::sin(angle), std::cos(angle)}; }
};

double normalize_angle_pi(double angle);          // wraps into [0, pi)
double angle_distance_pi(double a, double b);     // pi-periodic distance

struct GripperConfig {
    double max_opening = 0.08;    // m
    double jaw_length = 0.02;     // m, capsule segment
    double jaw_radius = 0.0025;   // m
    double closing_speed = 0.05;  // m/s separation shrink rate
    double force_limit = 20.0;    // N per jaw
    double width_floor = 0.002;   // m

    void validate() const;
};

struct ShakeSchedule {
    std::vector<double> levels = {2.0, 5.0, 10.0, 20.0};  // peak accel, m/s^2
    int cycles_per_level = 2;
    double frequency = 2.0;  // Hz

    void validate() const;
};

enum class FailureStage { None, Close, Shake };

struct GraspOutcome {
    double metric = 0.0;         // levels survived / total (1 if schedule empty)
    double max_slip = 0.0;       // m, gripper-frame centroid displacement
    int levels_survived = 0;
    int total_levels = 0;
    FailureStage failure_stage = FailureStage::None;
    int failed_level = -1;       // 0-based, Shake only
    double final_jaw_separation = 0.0;
};

std::string failure_stage_name(const GraspOutcome& o);

// Antipodal candidate sampling over boundary vertex pairs. A pair qualifies
// when the connecting line lies inside the friction cone at both contacts.
// Candidates are deduplicated (2 mm center, 5 deg angle) and capped at
// n_target; deterministic per seed. Throws when fewer than 5 pairs qualify.
std::vector<GraspRect> sample_antipodal(const geom::PlanarMesh& mesh,
                                        double friction_half_angle, int n_target,
                                        uint64_t seed);

// Keeps candidates whose pre-grasp jaw capsules clear the mesh (1 mm axis
// sampling) and whose width fits the gripper opening. Order preserved.
std::vector<GraspRect> filter_collisions(const std::vector<GraspRect>& candidates,
                                         const geom::PlanarMesh& mesh,
                                         const GripperConfig& gripper);

// Object extent along the grasp axis, restricted to the band the jaws cover;
// the undeformed caging width for this grasp.
double undeformed_width(const geom::PlanarMesh& mesh, const GraspRect& grasp,
                        const GripperConfig& gripper);

struct CloseResult {
    fem::SoftBodyState state;
    std::vector<fem::RigidObstacle> jaws;  // [0] at +axis side, [1] at -axis side
    GraspRect grasp;
    double final_separation = 0.0;
    bool ok = false;              // jaws hold the object with real contact
    double sim_time = 0.0;
};

// Spawns jaws at separation = grasp.width, closes until force_limit or
// width_floor, holds until the body settles. Throws SimError on solver
// failure (the caller decides on dt fallback).
CloseResult execute_close(const geom::PlanarMesh& mesh,
                          const std::vector<fem::Material>& materials,
                          const GraspRect& grasp, const GripperConfig& gripper,
                          const fem::SimConfig& sim);

// Oscillates the jaw pair through the schedule; a level survives when the
// gripper-frame centroid slip stays below 5 mm and the centroid stays
// between the jaws. Mutates the close result in place.
GraspOutcome shake_test(CloseResult& closed, const ShakeSchedule& schedule,
                        const fem::SimConfig& sim, const GripperConfig& gripper);

struct LabeledGrasp {
    GraspRect rect;       // quality = outcome.metric
    GraspOutcome outcome;
};

// Runs close + shake per candidate on a worker pool. Per-trial failures
// (including one dt-halving retry after solver errors) become quality 0;
// the batch never aborts. Output order matches candidate order.
std::vector<LabeledGrasp> label_grasps(const geom::PlanarMesh& mesh,
                                       const std::vector<fem::Material>& materials,
                                       const std::vector<GraspRect>& candidates,
                                       const GripperConfig& gripper,
                                       const ShakeSchedule& schedule,
                                       const fem::SimConfig& sim, int jobs = 1);

// Tab-separated trial log line: object id, E, center, angle, width, metric, stage.
std::string trial_log_line(const std::string& object_id, double young_modulus,
                           const LabeledGrasp& g);

constexpr double kPositiveQualityThreshold = 0.5;
constexpr double kSamplerClearance = 0.005;  // m added per side to pair distance

}  // namespace stiffgrasp::grasp
