#include "stiffgrasp/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stiffgrasp/parallel.hpp"

namespace stiffgrasp::grasp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSlipLimit = 0.005;        // m
constexpr double kSettleSpeed = 1e-4;       // m/s
constexpr double kMinHoldForce = 0.1;       // N
constexpr double kMaxInvertedFraction = 0.05;
constexpr double kMaxSettleTime = 1.5;      // s

}  // namespace

double normalize_angle_pi(double angle) {
    double a = std::fmod(angle, kPi);
    if (a < 0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

double angle_distance_pi(double a, double b) {
    double d = std::abs(normalize_angle_pi(a) - normalize_angle_pi(b));
    return std::min(d, kPi - d);
}

void GripperConfig::validate() const {
    if (!(max_opening > 0 && jaw_length > 0 && jaw_radius > 0 && closing_speed > 0 &&
          force_limit > 0 && width_floor > 0))
        throw ValidationError("gripper parameters must be positive");
    if (!(width_floor < max_opening))
        throw ValidationError("width_floor must be below max_opening");
}

void ShakeSchedule::validate() const {
    for (size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0)) throw ValidationError("shake levels must be positive");
        if (i > 0 && !(levels[i] > levels[i - 1]))
            throw ValidationError("shake levels must be strictly increasing");
    }
    if (cycles_per_level < 1) throw ValidationError("cycles_per_level must be >= 1");
    if (!(frequency > 0)) throw ValidationError("shake frequency must be positive");
}

std::string failure_stage_name(const GraspOutcome& o) {
    switch (o.failure_stage) {
        case FailureStage::None: return "none";
        case FailureStage::Close: return "close";
        case FailureStage::Shake: return "shake-level-" + std::to_string(o.failed_level);
    }
    return "?";
}

std::vector<GraspRect> sample_antipodal(const geom::PlanarMesh& mesh,
                                        double friction_half_angle, int n_target,
                                        uint64_t seed) {
    if (n_target <= 0) throw ValidationError("n_target must be positive");
    const auto& loop = mesh.boundary_loop;
    auto normals = geom::boundary_normals(mesh);
    int nb = static_cast<int>(loop.size());
    double cos_alpha = std::cos(friction_half_angle);

    // enumerate qualifying boundary vertex pairs
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < nb; ++i) {
        for (int j = i + 1; j < nb; ++j) {
            Vec2 p1 = mesh.vertices[loop[i]];
            Vec2 p2 = mesh.vertices[loop[j]];
            Vec2 d = p2 - p1;
            double len = d.norm();
            if (len < 1e-6) continue;
            Vec2 u = d / len;
            if (u.dot(normals[i]) <= -cos_alpha && u.dot(normals[j]) >= cos_alpha)
                pairs.push_back({i, j});
        }
    }
    if (static_cast<int>(pairs.size()) < 5)
        throw ValidationError("degenerate shape: fewer than 5 antipodal pairs");

    // seeded shuffle, then greedy dedup (2 mm centers, 5 deg angles)
    Rng rng(hash_combine(seed, 0xA4714ull));
    for (size_t i = pairs.size(); i > 1; --i)
        std::swap(pairs[i - 1], pairs[rng.uniform_index(i)]);

    std::vector<GraspRect> out;
    for (const auto& [i, j] : pairs) {
        if (static_cast<int>(out.size()) >= n_target) break;
        Vec2 p1 = mesh.vertices[loop[i]];
        Vec2 p2 = mesh.vertices[loop[j]];
        GraspRect g;
        g.center = 0.5 * (p1 + p2);
        Vec2 d = p2 - p1;
        g.angle = normalize_angle_pi(std::atan2(d.y(), d.x()));
        g.width = d.norm() + 2.0 * kSamplerClearance;
        bool dup = false;
        for (const auto& prev : out) {
            if ((prev.center - g.center).norm() < 0.002 &&
                angle_distance_pi(prev.angle, g.angle) < 5.0 * kPi / 180.0) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(g);
    }
    return out;
}

namespace {

// Jaw capsule axes at a given separation (inner faces `separation` apart).
std::pair<fem::RigidObstacle, fem::RigidObstacle> jaw_capsules(const GraspRect& g,
                                                               const GripperConfig& gr,
                                                               double separation) {
    Vec2 u = g.axis(), v = g.lateral();
    fem::RigidObstacle a, b;
    a.radius = b.radius = gr.jaw_radius;
    Vec2 ca = g.center + u * (separation / 2 + gr.jaw_radius);
    Vec2 cb = g.center - u * (separation / 2 + gr.jaw_radius);
    a.p0 = ca - v * (gr.jaw_length / 2);
    a.p1 = ca + v * (gr.jaw_length / 2);
    b.p0 = cb - v * (gr.jaw_length / 2);
    b.p1 = cb + v * (gr.jaw_length / 2);
    return {a, b};
}

double jaw_separation(const std::vector<fem::RigidObstacle>& jaws, const GraspRect& g,
                      const GripperConfig& gr) {
    Vec2 u = g.axis();
    return (jaws[0].midpoint() - jaws[1].midpoint()).dot(u) - 2.0 * gr.jaw_radius;
}

}  // namespace

std::vector<GraspRect> filter_collisions(const std::vector<GraspRect>& candidates,
                                         const geom::PlanarMesh& mesh,
                                         const GripperConfig& gripper) {
    gripper.validate();
    std::vector<GraspRect> kept;
    for (const auto& g : candidates) {
        if (g.width > gripper.max_opening || g.width <= 0) continue;
        auto [a, b] = jaw_capsules(g, gripper, g.width);
        bool clear = true;
        for (const auto& jaw : {a, b}) {
            Vec2 seg = jaw.p1 - jaw.p0;
            double len = seg.norm();
            int steps = std::max(1, static_cast<int>(std::ceil(len / 0.001)));
            for (int s = 0; s <= steps && clear; ++s) {
                Vec2 p = jaw.p0 + seg * (static_cast<double>(s) / steps);
                if (geom::signed_distance(mesh, p) <= gripper.jaw_radius) clear = false;
            }
            if (!clear) break;
        }
        if (clear) kept.push_back(g);
    }
    return kept;
}

double undeformed_width(const geom::PlanarMesh& mesh, const GraspRect& grasp,
                        const GripperConfig& gripper) {
    Vec2 u = grasp.axis(), v = grasp.lateral();
    double band = gripper.jaw_length / 2 + gripper.jaw_radius;
    double lo = 1e30, hi = -1e30;
    for (int vid : mesh.boundary_loop) {
        Vec2 rel = mesh.vertices[vid] - grasp.center;
        if (std::abs(rel.dot(v)) > band) continue;
        double proj = rel.dot(u);
        lo = std::min(lo, proj);
        hi = std::max(hi, proj);
    }
    return hi > lo ? hi - lo : 0.0;
}

CloseResult execute_close(const geom::PlanarMesh& mesh,
                          const std::vector<fem::Material>& materials,
                          const GraspRect& grasp, const GripperConfig& gripper,
                          const fem::SimConfig& sim) {
    gripper.validate();
    sim.validate();
    CloseResult res;
    res.grasp = grasp;
    res.state = fem::precompute_elements(mesh, materials);
    auto [a, b] = jaw_capsules(grasp, gripper, grasp.width);
    res.jaws = {a, b};

    Vec2 u = grasp.axis();
    double close_budget = (grasp.width - gripper.width_floor) / gripper.closing_speed + 0.2;
    int close_frames = static_cast<int>(std::ceil(close_budget / sim.dt));
    bool holding = false;

    for (int frame = 0; frame < close_frames && !holding; ++frame) {
        res.jaws[0].velocity = -u * (gripper.closing_speed / 2);
        res.jaws[1].velocity = u * (gripper.closing_speed / 2);
        auto info = fem::step(res.state, res.jaws, sim);
        res.sim_time += sim.dt;
        if (res.state.inversion_fraction() > kMaxInvertedFraction) {
            res.ok = false;
            res.final_separation = jaw_separation(res.jaws, grasp, gripper);
            return res;
        }
        double sep = jaw_separation(res.jaws, grasp, gripper);
        double fmax = std::max(info.obstacle_normal_force[0], info.obstacle_normal_force[1]);
        if (fmax >= gripper.force_limit || sep <= gripper.width_floor) holding = true;
    }

    res.jaws[0].velocity = Vec2::Zero();
    res.jaws[1].velocity = Vec2::Zero();

    int settle_frames = static_cast<int>(std::ceil(kMaxSettleTime / sim.dt));
    for (int frame = 0; frame < settle_frames; ++frame) {
        fem::step(res.state, res.jaws, sim);
        res.sim_time += sim.dt;
        if (res.state.inversion_fraction() > kMaxInvertedFraction) {
            res.ok = false;
            res.final_separation = jaw_separation(res.jaws, grasp, gripper);
            return res;
        }
        if (res.state.max_speed() < kSettleSpeed) break;
    }

    res.final_separation = jaw_separation(res.jaws, grasp, gripper);

    std::vector<double> jaw_force;
    fem::contact_forces(res.state, res.jaws, sim, &jaw_force);
    res.ok = holding && std::min(jaw_force[0], jaw_force[1]) >= kMinHoldForce;
    return res;
}

GraspOutcome shake_test(CloseResult& closed, const ShakeSchedule& schedule,
                        const fem::SimConfig& sim, const GripperConfig& gripper) {
    schedule.validate();
    GraspOutcome out;
    out.total_levels = static_cast<int>(schedule.levels.size());
    out.final_jaw_separation = closed.final_separation;
    if (!closed.ok) {
        out.failure_stage = FailureStage::Close;
        out.metric = 0.0;
        return out;
    }
    if (schedule.levels.empty()) {
        out.metric = 1.0;  // vacuous pass by convention
        return out;
    }

    Vec2 u = closed.grasp.axis(), v = closed.grasp.lateral();
    double omega = 2.0 * kPi * schedule.frequency;
    double level_time = schedule.cycles_per_level / schedule.frequency;
    int frames = static_cast<int>(std::round(level_time / sim.dt));
    // base poses the oscillation is applied around
    std::vector<fem::RigidObstacle> base = closed.jaws;
    double separation = closed.final_separation;

    for (int k = 0; k < out.total_levels; ++k) {
        Vec2 axis = (k % 2 == 0) ? u : v;
        double amp = schedule.levels[k] / (omega * omega);
        Vec2 jaw_mid0 = 0.5 * (closed.jaws[0].midpoint() + closed.jaws[1].midpoint());
        Vec2 ref = closed.state.center_of_mass() - jaw_mid0;
        bool survived = true;

        for (int frame = 0; frame < frames; ++frame) {
            double t0 = frame * sim.dt;
            Vec2 offset = amp * std::sin(omega * t0) * axis;
            Vec2 vel = amp * omega * std::cos(omega * t0) * axis;
            for (int j = 0; j < 2; ++j) {
                closed.jaws[j] = base[j];
                closed.jaws[j].translate(offset);
                closed.jaws[j].velocity = vel;
            }
            fem::step(closed.state, closed.jaws, sim);
            if (closed.state.inversion_fraction() > kMaxInvertedFraction) {
                survived = false;
                break;
            }
            Vec2 jaw_mid = 0.5 * (closed.jaws[0].midpoint() + closed.jaws[1].midpoint());
            Vec2 rel = closed.state.center_of_mass() - jaw_mid;
            double slip = (rel - ref).norm();
            out.max_slip = std::max(out.max_slip, slip);
            bool between = std::abs(rel.dot(u)) <= separation / 2 + gripper.jaw_radius &&
                           std::abs(rel.dot(v)) <= gripper.jaw_length / 2;
            if (slip > kSlipLimit || !between) {
                survived = false;
                break;
            }
        }
        // park jaws back on the base pose (full cycles end at zero offset)
        for (int j = 0; j < 2; ++j) {
            closed.jaws[j] = base[j];
            closed.jaws[j].velocity = Vec2::Zero();
        }
        if (!survived) {
            out.failure_stage = FailureStage::Shake;
            out.failed_level = k;
            break;
        }
        out.levels_survived = k + 1;
    }
    out.metric = static_cast<double>(out.levels_survived) / out.total_levels;
    if (out.levels_survived == out.total_levels) out.failure_stage = FailureStage::None;
    return out;
}

std::vector<LabeledGrasp> label_grasps(const geom::PlanarMesh& mesh,
                                       const std::vector<fem::Material>& materials,
                                       const std::vector<GraspRect>& candidates,
                                       const GripperConfig& gripper,
                                       const ShakeSchedule& schedule,
                                       const fem::SimConfig& sim, int jobs) {
    std::vector<LabeledGrasp> results(candidates.size());
    parallel_for(candidates.size(), jobs, [&](size_t i) {
        auto run = [&](const fem::SimConfig& cfg) {
            CloseResult closed = execute_close(mesh, materials, candidates[i], gripper, cfg);
            return shake_test(closed, schedule, cfg, gripper);
        };
        GraspOutcome outcome;
        try {
            outcome = run(sim);
        } catch (const SimError&) {
            fem::SimConfig halved = sim;
            halved.dt = sim.dt / 2;
            try {
                outcome = run(halved);
            } catch (const std::exception&) {
                outcome = GraspOutcome{};
                outcome.total_levels = static_cast<int>(schedule.levels.size());
                outcome.failure_stage = FailureStage::Close;
            }
        }
        results[i].rect = candidates[i];
        results[i].rect.quality = outcome.metric;
        results[i].outcome = outcome;
    });
    return results;
}

std::string trial_log_line(const std::string& object_id, double young_modulus,
                           const LabeledGrasp& g) {
    std::ostringstream os;
    os << object_id << '\t' << format_double(young_modulus) << '\t'
       << format_double(g.rect.center.x()) << '\t' << format_double(g.rect.center.y()) << '\t'
       << format_double(g.rect.angle) << '\t' << format_double(g.rect.width) << '\t'
       << format_double(g.outcome.metric) << '\t' << failure_stage_name(g.outcome);
    return os.str();
}

}  // namespace stiffgrasp::grasp
