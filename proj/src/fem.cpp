#include "stiffgrasp/fem.hpp"

#include <cmath>
#include <sstream>

namespace stiffgrasp::fem {

namespace {

// Plane-strain elasticity matrix in Voigt order (xx, yy, xy).
Eigen::Matrix3d elasticity_matrix(const Material& m) {
    double E = m.young_modulus, nu = m.poisson_ratio;
    double f = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Eigen::Matrix3d C;
    C << f * (1.0 - nu), f * nu, 0.0,
         f * nu, f * (1.0 - nu), 0.0,
         0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0;
    return C;
}

// Constant-strain-triangle strain operator (3x6) from shape-function
// gradients; rows are (eps_xx, eps_yy, 2*eps_xy).
Eigen::Matrix<double, 3, 6> strain_operator(const Vec2& x0, const Vec2& x1, const Vec2& x2,
                                            double area2) {
    double b0 = x1.y() - x2.y(), b1 = x2.y() - x0.y(), b2 = x0.y() - x1.y();
    double c0 = x2.x() - x1.x(), c1 = x0.x() - x2.x(), c2 = x1.x() - x0.x();
    Eigen::Matrix<double, 3, 6> B;
    B << b0, 0, b1, 0, b2, 0,
         0, c0, 0, c1, 0, c2,
         c0, b0, c1, b1, c2, b2;
    return B / area2;
}

inline void gather(const std::vector<Vec2>& field, const std::array<int, 3>& tri, Vec6& out) {
    for (int i = 0; i < 3; ++i) {
        out[2 * i] = field[tri[i]].x();
        out[2 * i + 1] = field[tri[i]].y();
    }
}

// y_e = R_hat * Ke * R_hat^T * w_e for one element, with R_hat = blkdiag(R,R,R).
inline Vec6 rotate_apply(const Mat2& R, const Mat6& Ke, const Vec6& w) {
    Vec6 wl;
    for (int i = 0; i < 3; ++i)
        wl.segment<2>(2 * i) = R.transpose() * w.segment<2>(2 * i);
    Vec6 y = Ke * wl;
    for (int i = 0; i < 3; ++i)
        y.segment<2>(2 * i) = R * y.segment<2>(2 * i);
    return y;
}

}  // namespace

void Material::validate() const {
    if (!(young_modulus > 0)) throw ValidationError("young_modulus must be > 0");
    if (!(poisson_ratio >= 0 && poisson_ratio < 0.5))
        throw ValidationError("poisson_ratio must be in [0, 0.5)");
    if (!(density > 0)) throw ValidationError("density must be > 0");
    if (!(rayleigh_alpha >= 0) || !(rayleigh_beta >= 0))
        throw ValidationError("rayleigh damping must be >= 0");
    if (!std::isfinite(lame_mu()) || !std::isfinite(lame_lambda()))
        throw ValidationError("Lame parameters not finite");
}

void SimConfig::validate() const {
    if (!(dt > 0)) throw ValidationError("dt must be > 0");
    if (substeps < 1) throw ValidationError("substeps must be >= 1");
    if (!(cg_tolerance > 0 && cg_tolerance < 1))
        throw ValidationError("cg_tolerance must be in (0,1)");
    if (cg_max_iterations < 1) throw ValidationError("cg_max_iterations must be >= 1");
    if (!(contact_stiffness > 0)) throw ValidationError("contact_stiffness must be > 0");
    if (!(friction_mu >= 0)) throw ValidationError("friction_mu must be >= 0");
}

double SoftBodyState::inversion_fraction() const {
    if (inverted.empty()) return 0.0;
    size_t n = 0;
    for (uint8_t f : inverted) n += f;
    return static_cast<double>(n) / static_cast<double>(inverted.size());
}

Vec2 SoftBodyState::center_of_mass() const {
    Vec2 c = Vec2::Zero();
    double m = 0;
    for (int i = 0; i < num_vertices(); ++i) {
        c += mass[i] * positions[i];
        m += mass[i];
    }
    return c / m;
}

Vec2 SoftBodyState::linear_momentum() const {
    Vec2 p = Vec2::Zero();
    for (int i = 0; i < num_vertices(); ++i) p += mass[i] * velocities[i];
    return p;
}

double SoftBodyState::max_speed() const {
    double s = 0;
    for (const auto& v : velocities) s = std::max(s, v.norm());
    return s;
}

SoftBodyState precompute_elements(const geom::PlanarMesh& mesh,
                                  const std::vector<Material>& materials) {
    int regions = mesh.num_regions();
    if (static_cast<int>(materials.size()) < regions)
        throw ValidationError("missing material for a mesh region");
    for (const auto& m : materials) m.validate();

    SoftBodyState st;
    st.rest_positions = mesh.vertices;
    st.positions = mesh.vertices;
    st.velocities.assign(mesh.vertices.size(), Vec2::Zero());
    st.mass.assign(mesh.vertices.size(), 0.0);
    st.mass_alpha.assign(mesh.vertices.size(), 0.0);
    st.kinematic.assign(mesh.vertices.size(), 0);
    st.triangles = mesh.triangles;

    int ne = mesh.num_triangles();
    st.inv_rest_shape.resize(ne);
    st.rest_area.resize(ne);
    st.element_stiffness.resize(ne);
    st.rayleigh_beta.resize(ne);
    st.rotation.assign(ne, Mat2::Identity());
    st.inverted.assign(ne, 0);

    for (int e = 0; e < ne; ++e) {
        const auto& t = mesh.triangles[e];
        const Material& mat = materials[mesh.triangle_region[e]];
        const Vec2& x0 = mesh.vertices[t[0]];
        const Vec2& x1 = mesh.vertices[t[1]];
        const Vec2& x2 = mesh.vertices[t[2]];
        Mat2 Dm;
        Dm.col(0) = x1 - x0;
        Dm.col(1) = x2 - x0;
        double det = Dm.determinant();
        if (det <= 1e-14)
            throw ValidationError("degenerate triangle in mesh (zero or negative area)");
        st.inv_rest_shape[e] = Dm.inverse();
        double area = det / 2.0;
        st.rest_area[e] = area;
        auto B = strain_operator(x0, x1, x2, det);
        st.element_stiffness[e] = area * B.transpose() * elasticity_matrix(mat) * B;
        st.rayleigh_beta[e] = mat.rayleigh_beta;
        double m3 = mat.density * area / 3.0;
        for (int i = 0; i < 3; ++i) {
            st.mass[t[i]] += m3;
            st.mass_alpha[t[i]] += mat.rayleigh_alpha * m3;
        }
    }
    return st;
}

bool try_polar_rotation(const Mat2& F, Mat2& R) {
    if (!(F.determinant() > 0)) return false;
    double a = F(0, 0) + F(1, 1);
    double b = F(1, 0) - F(0, 1);
    double r = std::hypot(a, b);
    if (r < 1e-300) return false;
    a /= r;
    b /= r;
    R << a, -b, b, a;
    return true;
}

Mat2 polar_rotation(const Mat2& F) {
    Mat2 R;
    if (!try_polar_rotation(F, R))
        throw ValidationError("polar_rotation requires det(F) > 0");
    return R;
}

std::vector<Vec2> elastic_forces(SoftBodyState& st) {
    std::vector<Vec2> f(st.positions.size(), Vec2::Zero());
    for (int e = 0; e < st.num_elements(); ++e) {
        const auto& t = st.triangles[e];
        Mat2 Ds;
        Ds.col(0) = st.positions[t[1]] - st.positions[t[0]];
        Ds.col(1) = st.positions[t[2]] - st.positions[t[0]];
        Mat2 F = Ds * st.inv_rest_shape[e];
        Mat2 R;
        if (try_polar_rotation(F, R)) {
            st.rotation[e] = R;
            st.inverted[e] = 0;
        } else {
            R = st.rotation[e];  // keep last good frame
            st.inverted[e] = 1;
        }
        Vec6 xe, Xe;
        gather(st.positions, t, xe);
        gather(st.rest_positions, t, Xe);
        Vec6 d;
        for (int i = 0; i < 3; ++i)
            d.segment<2>(2 * i) = R.transpose() * xe.segment<2>(2 * i) - Xe.segment<2>(2 * i);
        Vec6 fe = st.element_stiffness[e] * d;
        for (int i = 0; i < 3; ++i)
            f[t[i]] -= R * fe.segment<2>(2 * i);
    }
    return f;
}

std::vector<Vec2> contact_forces(const SoftBodyState& st,
                                 const std::vector<RigidObstacle>& obstacles,
                                 const SimConfig& cfg,
                                 std::vector<double>* obstacle_normal_force) {
    constexpr double kSlipSpeed = 1e-4;  // m/s, friction regularization knee
    std::vector<Vec2> f(st.positions.size(), Vec2::Zero());
    if (obstacle_normal_force) obstacle_normal_force->assign(obstacles.size(), 0.0);
    for (size_t oi = 0; oi < obstacles.size(); ++oi) {
        const auto& ob = obstacles[oi];
        Vec2 seg = ob.p1 - ob.p0;
        double seg2 = seg.squaredNorm();
        for (int i = 0; i < st.num_vertices(); ++i) {
            const Vec2& x = st.positions[i];
            double t = seg2 > 0 ? std::clamp(seg.dot(x - ob.p0) / seg2, 0.0, 1.0) : 0.0;
            Vec2 cp = ob.p0 + t * seg;
            Vec2 delta = x - cp;
            double dist = delta.norm();
            if (dist >= ob.radius) continue;
            Vec2 n = dist > 1e-12 ? Vec2(delta / dist) : Vec2(-seg.y(), seg.x()).normalized();
            double depth = ob.radius - dist;
            Vec2 v_rel = st.velocities[i] - ob.velocity;
            double vn = v_rel.dot(n);
            double fn = cfg.contact_stiffness * depth - cfg.contact_damping * vn;
            if (fn <= 0) continue;
            Vec2 force = fn * n;
            Vec2 vt = v_rel - vn * n;
            double vt_norm = vt.norm();
            if (vt_norm > 1e-15 && cfg.friction_mu > 0) {
                double scale = std::min(1.0, vt_norm / kSlipSpeed);
                force -= cfg.friction_mu * fn * scale * (vt / vt_norm);
            }
            f[i] += force;
            if (obstacle_normal_force) (*obstacle_normal_force)[oi] += fn;
        }
    }
    return f;
}

namespace {

// A(w) = (1 + h*alpha)Mw + (h*beta + h^2) K_corot w, with fixed dofs pinned
// to identity so the operator stays SPD.
struct SystemOperator {
    const SoftBodyState& st;
    double h;

    void apply(const std::vector<Vec2>& w, std::vector<Vec2>& out) const {
        int nv = st.num_vertices();
        for (int i = 0; i < nv; ++i)
            out[i] = (st.mass[i] + h * st.mass_alpha[i]) * w[i];
        for (int e = 0; e < st.num_elements(); ++e) {
            const auto& t = st.triangles[e];
            double k = h * st.rayleigh_beta[e] + h * h;
            Vec6 we;
            for (int i = 0; i < 3; ++i) {
                // fixed dofs are masked out of the elastic coupling
                Vec2 wi = w[t[i]];
                if (st.kinematic[t[i]] & kFixedX) wi.x() = 0;
                if (st.kinematic[t[i]] & kFixedY) wi.y() = 0;
                we.segment<2>(2 * i) = wi;
            }
            Vec6 y = rotate_apply(st.rotation[e], st.element_stiffness[e], we);
            for (int i = 0; i < 3; ++i) {
                Vec2 yi = k * y.segment<2>(2 * i);
                if (st.kinematic[t[i]] & kFixedX) yi.x() = 0;
                if (st.kinematic[t[i]] & kFixedY) yi.y() = 0;
                out[t[i]] += yi;
            }
        }
        // identity on fixed dofs
        for (int i = 0; i < nv; ++i) {
            if (st.kinematic[i] & kFixedX) out[i].x() = w[i].x() * st.mass[i];
            if (st.kinematic[i] & kFixedY) out[i].y() = w[i].y() * st.mass[i];
        }
    }

    // diag(A) for the Jacobi preconditioner
    void diagonal(std::vector<Vec2>& d) const {
        int nv = st.num_vertices();
        for (int i = 0; i < nv; ++i)
            d[i] = Vec2::Constant(st.mass[i] + h * st.mass_alpha[i]);
        for (int e = 0; e < st.num_elements(); ++e) {
            const auto& t = st.triangles[e];
            double k = h * st.rayleigh_beta[e] + h * h;
            const Mat2& R = st.rotation[e];
            const Mat6& Ke = st.element_stiffness[e];
            for (int i = 0; i < 3; ++i) {
                Mat2 blk = R * Ke.block<2, 2>(2 * i, 2 * i) * R.transpose();
                d[t[i]] += k * Vec2(blk(0, 0), blk(1, 1));
            }
        }
        for (int i = 0; i < nv; ++i) {
            if (st.kinematic[i] & kFixedX) d[i].x() = st.mass[i];
            if (st.kinematic[i] & kFixedY) d[i].y() = st.mass[i];
        }
    }
};

double dot(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
    return s;
}

}  // namespace

StepInfo step(SoftBodyState& st, std::vector<RigidObstacle>& obstacles, const SimConfig& cfg) {
    cfg.validate();
    StepInfo info;
    info.obstacle_normal_force.assign(obstacles.size(), 0.0);
    double h = cfg.dt / cfg.substeps;
    int nv = st.num_vertices();

    std::vector<Vec2> rhs(nv), dv(nv, Vec2::Zero()), r(nv), z(nv), p(nv), Ap(nv), diag(nv);
    std::vector<double> jaw_force;

    for (int sub = 0; sub < cfg.substeps; ++sub) {
        auto f_el = elastic_forces(st);
        auto f_c = contact_forces(st, obstacles, cfg, &jaw_force);
        for (size_t oi = 0; oi < obstacles.size(); ++oi)
            info.obstacle_normal_force[oi] += jaw_force[oi] / cfg.substeps;

        // rhs = h*(f_el + f_c + f_ext - D v); D v = alphaM v + beta K v
        for (int i = 0; i < nv; ++i)
            rhs[i] = f_el[i] + f_c[i] + st.mass[i] * cfg.gravity - st.mass_alpha[i] * st.velocities[i];
        for (int e = 0; e < st.num_elements(); ++e) {
            const auto& t = st.triangles[e];
            Vec6 ve;
            gather(st.velocities, t, ve);
            Vec6 y = rotate_apply(st.rotation[e], st.element_stiffness[e], ve);
            for (int i = 0; i < 3; ++i)
                rhs[t[i]] -= st.rayleigh_beta[e] * y.segment<2>(2 * i);
        }
        for (int i = 0; i < nv; ++i) {
            rhs[i] *= h;
            if (st.kinematic[i] & kFixedX) rhs[i].x() = 0;
            if (st.kinematic[i] & kFixedY) rhs[i].y() = 0;
        }

        SystemOperator A{st, h};
        double rhs_norm = std::sqrt(dot(rhs, rhs));
        if (rhs_norm < 1e-300) {
            std::fill(dv.begin(), dv.end(), Vec2::Zero());
        } else {
            A.diagonal(diag);
            // warm start from the previous substep's solution
            A.apply(dv, Ap);
            for (int i = 0; i < nv; ++i) r[i] = rhs[i] - Ap[i];
            for (int i = 0; i < nv; ++i) z[i] = Vec2(r[i].x() / diag[i].x(), r[i].y() / diag[i].y());
            p = z;
            double rz = dot(r, z);
            double res = std::sqrt(dot(r, r));
            int it = 0;
            while (res / rhs_norm > cfg.cg_tolerance) {
                if (it++ >= cfg.cg_max_iterations)
                    throw SimError("CG failed to converge (relative residual " +
                                       format_double(res / rhs_norm) + ")",
                                   res / rhs_norm);
                A.apply(p, Ap);
                double alpha = rz / dot(p, Ap);
                for (int i = 0; i < nv; ++i) dv[i] += alpha * p[i];
                for (int i = 0; i < nv; ++i) r[i] -= alpha * Ap[i];
                res = std::sqrt(dot(r, r));
                for (int i = 0; i < nv; ++i)
                    z[i] = Vec2(r[i].x() / diag[i].x(), r[i].y() / diag[i].y());
                double rz_new = dot(r, z);
                double beta = rz_new / rz;
                rz = rz_new;
                for (int i = 0; i < nv; ++i) p[i] = z[i] + beta * p[i];
            }
            info.cg_iterations += it;
        }

        for (int i = 0; i < nv; ++i) {
            Vec2 d = dv[i];
            if (st.kinematic[i] & kFixedX) d.x() = 0;
            if (st.kinematic[i] & kFixedY) d.y() = 0;
            st.velocities[i] += d;
            st.positions[i] += h * st.velocities[i];
        }
        for (auto& ob : obstacles) ob.translate(h * ob.velocity);
    }
    return info;
}

double kinetic_energy(const SoftBodyState& st) {
    double e = 0;
    for (int i = 0; i < st.num_vertices(); ++i)
        e += 0.5 * st.mass[i] * st.velocities[i].squaredNorm();
    return e;
}

namespace {

double elastic_energy_impl(const SoftBodyState& st, bool fresh_rotations) {
    double e = 0;
    for (int el = 0; el < st.num_elements(); ++el) {
        const auto& t = st.triangles[el];
        Mat2 R = st.rotation[el];
        if (fresh_rotations) {
            Mat2 Ds;
            Ds.col(0) = st.positions[t[1]] - st.positions[t[0]];
            Ds.col(1) = st.positions[t[2]] - st.positions[t[0]];
            Mat2 F = Ds * st.inv_rest_shape[el];
            Mat2 Rf;
            if (try_polar_rotation(F, Rf)) R = Rf;
        }
        Vec6 d;
        for (int i = 0; i < 3; ++i)
            d.segment<2>(2 * i) =
                R.transpose() * st.positions[t[i]] - st.rest_positions[t[i]];
        e += 0.5 * d.dot(st.element_stiffness[el] * d);
    }
    return e;
}

}  // namespace

double elastic_energy(const SoftBodyState& st) { return elastic_energy_impl(st, true); }
double elastic_energy_lagged(const SoftBodyState& st) { return elastic_energy_impl(st, false); }
double total_energy(const SoftBodyState& st) { return kinetic_energy(st) + elastic_energy(st); }

FrameDumper::FrameDumper(const std::string& path, int num_vertices, double dt)
    : path_(path), num_vertices_(num_vertices), dt_(dt) {}

void FrameDumper::append(const SoftBodyState& state) {
    for (const auto& p : state.positions) {
        put_le<float>(buffer_, static_cast<float>(p.x()));
        put_le<float>(buffer_, static_cast<float>(p.y()));
    }
    ++frames_;
}

void FrameDumper::close() {
    std::ostringstream head;
    head << "stiffgrasp-frames v1\n"
         << "vertices " << num_vertices_ << "\n"
         << "frames " << frames_ << "\n"
         << "dt " << format_double(dt_) << "\n"
         << "layout float32-le xy per vertex\n"
         << "end\n";
    std::string h = head.str();
    std::vector<uint8_t> out(h.begin(), h.end());
    out.insert(out.end(), buffer_.begin(), buffer_.end());
    write_file_bytes(path_, out);
}

}  // namespace stiffgrasp::fem
