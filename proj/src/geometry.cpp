#include "stiffgrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace stiffgrasp::geom {

namespace {

constexpr double kPi = std::numbers::pi;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// ---------------------------------------------------------------------------
// Region polygon construction. All curved edges are discretized at roughly
// the target edge length; corner vertices of straight-edged shapes are exact.

void append_arc(std::vector<Vec2>& poly, const Vec2& center, double radius, double a0, double a1,
                double h) {
    double span = a1 - a0;
    int n = std::max(3, static_cast<int>(std::ceil(std::abs(span) * radius / h)));
    for (int i = 0; i < n; ++i) {  // excludes the final point; next edge provides it
        double a = a0 + span * (static_cast<double>(i) / n);
        poly.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
    }
}

std::vector<Vec2> polygon_disk(double r, double h) {
    std::vector<Vec2> poly;
    int n = std::max(12, static_cast<int>(std::ceil(2.0 * kPi * r / h)));
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * kPi * i / n;
        poly.push_back(r * Vec2(std::cos(a), std::sin(a)));
    }
    return poly;
}

std::vector<Vec2> polygon_box(double w, double hgt) {
    double x = w / 2, y = hgt / 2;
    return {{-x, -y}, {x, -y}, {x, y}, {-x, y}};
}

std::vector<Vec2> polygon_rounded_box(double w, double hgt, double rc, double h) {
    double x = w / 2 - rc, y = hgt / 2 - rc;
    std::vector<Vec2> poly;
    append_arc(poly, {x, -y}, rc, -kPi / 2, 0.0, h);
    append_arc(poly, {x, y}, rc, 0.0, kPi / 2, h);
    append_arc(poly, {-x, y}, rc, kPi / 2, kPi, h);
    append_arc(poly, {-x, -y}, rc, kPi, 3 * kPi / 2, h);
    return poly;
}

std::vector<Vec2> polygon_ellipse(double a, double b, double h) {
    std::vector<Vec2> poly;
    double perim = kPi * (3 * (a + b) - std::sqrt((3 * a + b) * (a + 3 * b)));  // Ramanujan
    int n = std::max(12, static_cast<int>(std::ceil(perim / h)));
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * kPi * i / n;
        poly.push_back(Vec2(a * std::cos(t), b * std::sin(t)));
    }
    return poly;
}

std::vector<Vec2> polygon_capsule(double len, double r, double h) {
    double x = len / 2;
    std::vector<Vec2> poly;
    append_arc(poly, {x, 0}, r, -kPi / 2, kPi / 2, h);
    append_arc(poly, {-x, 0}, r, kPi / 2, 3 * kPi / 2, h);
    return poly;
}

std::vector<Vec2> polygon_l_shape(double w, double hgt, double t) {
    // outer corner at top-right removed; centered on the full bounding box
    double x = w / 2, y = hgt / 2;
    return {{-x, -y}, {x, -y}, {x, -y + t}, {-x + t, -y + t}, {-x + t, y}, {-x, y}};
}

std::vector<Vec2> polygon_t_shape(double w, double hgt, double t) {
    // bar across the top, stem downward, centered on the bounding box
    double x = w / 2, y = hgt / 2, s = t / 2;
    return {{-s, -y}, {s, -y}, {s, y - t}, {x, y - t}, {x, y}, {-x, y}, {-x, y - t}, {-s, y - t}};
}

std::vector<Vec2> polygon_annulus_sector(double ro, double ri, double span, double h) {
    double a0 = -span / 2, a1 = span / 2;
    std::vector<Vec2> poly;
    append_arc(poly, {0, 0}, ro, a0, a1, h);
    poly.push_back(ro * Vec2(std::cos(a1), std::sin(a1)));
    append_arc(poly, {0, 0}, ri, a1, a0, h);
    poly.push_back(ri * Vec2(std::cos(a0), std::sin(a0)));
    return poly;
}

std::vector<Vec2> polygon_star(double ro, double ri, int points) {
    std::vector<Vec2> poly;
    for (int i = 0; i < points; ++i) {
        double a_out = 2.0 * kPi * i / points + kPi / 2;
        double a_in = a_out + kPi / points;
        poly.push_back(ro * Vec2(std::cos(a_out), std::sin(a_out)));
        poly.push_back(ri * Vec2(std::cos(a_in), std::sin(a_in)));
    }
    return poly;
}

struct RegionPoly {
    std::vector<Vec2> poly;
    int region_id = 0;
};

std::vector<Vec2> polygon_for(ShapeKind kind, double a, double b, double c, int n, double h) {
    switch (kind) {
        case ShapeKind::Disk: return polygon_disk(a, h);
        case ShapeKind::Box: return polygon_box(a, b);
        case ShapeKind::RoundedBox: return polygon_rounded_box(a, b, c, h);
        case ShapeKind::Ellipse: return polygon_ellipse(a, b, h);
        case ShapeKind::Capsule: return polygon_capsule(a, b, h);
        case ShapeKind::LShape: return polygon_l_shape(a, b, c);
        case ShapeKind::TShape: return polygon_t_shape(a, b, c);
        case ShapeKind::AnnulusSector: return polygon_annulus_sector(a, b, c, h);
        case ShapeKind::Star: return polygon_star(a, b, n);
        case ShapeKind::Composite:
            throw ValidationError("composite regions cannot nest composites");
    }
    throw ValidationError("unknown shape kind");
}

void validate_sizes(const ShapeSpec& s) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ValidationError(std::string("shape size must be > 0: ") + name);
    };
    switch (s.kind) {
        case ShapeKind::Disk: positive(s.a, "a"); break;
        case ShapeKind::Box: positive(s.a, "a"); positive(s.b, "b"); break;
        case ShapeKind::RoundedBox:
            positive(s.a, "a"); positive(s.b, "b"); positive(s.c, "c");
            if (2 * s.c >= std::min(s.a, s.b))
                throw ValidationError("rounded-box corner radius too large");
            break;
        case ShapeKind::Ellipse: positive(s.a, "a"); positive(s.b, "b"); break;
        case ShapeKind::Capsule: positive(s.a, "a"); positive(s.b, "b"); break;
        case ShapeKind::LShape:
        case ShapeKind::TShape:
            positive(s.a, "a"); positive(s.b, "b"); positive(s.c, "c");
            if (s.c >= s.a || s.c >= s.b)
                throw ValidationError("limb thickness exceeds outer size");
            break;
        case ShapeKind::AnnulusSector:
            positive(s.a, "a"); positive(s.b, "b"); positive(s.c, "c");
            if (s.b >= s.a) throw ValidationError("annulus inner radius >= outer radius");
            if (s.c <= 0 || s.c >= 2 * kPi) throw ValidationError("annulus span out of range");
            break;
        case ShapeKind::Star:
            positive(s.a, "a"); positive(s.b, "b");
            if (s.n < 3) throw ValidationError("star needs >= 3 points");
            if (s.b >= s.a) throw ValidationError("star inner radius >= outer radius");
            break;
        case ShapeKind::Composite:
            if (s.regions.size() < 2) throw ValidationError("composite needs >= 2 regions");
            break;
    }
    if (!(s.height > 0)) throw ValidationError("extrusion height must be > 0");
}

std::vector<RegionPoly> build_region_polys(const ShapeSpec& spec, double h) {
    validate_sizes(spec);
    std::vector<RegionPoly> out;
    if (spec.kind != ShapeKind::Composite) {
        out.push_back({polygon_for(spec.kind, spec.a, spec.b, spec.c, spec.n, h), 0});
        return out;
    }
    std::set<int> ids;
    for (const auto& r : spec.regions) {
        ShapeSpec sub;
        sub.kind = r.kind;
        sub.a = r.a; sub.b = r.b; sub.c = r.c; sub.n = r.n;
        sub.height = spec.height;
        validate_sizes(sub);
        auto poly = polygon_for(r.kind, r.a, r.b, r.c, r.n, h);
        for (auto& p : poly) p += r.offset;
        if (!ids.insert(r.region_id).second)
            throw ValidationError("duplicate composite region id");
        out.push_back({std::move(poly), r.region_id});
    }
    // overlap check: no region's interior point may fall strictly inside another
    for (size_t i = 0; i < out.size(); ++i) {
        for (size_t j = 0; j < out.size(); ++j) {
            if (i == j) continue;
            for (const auto& p : out[i].poly) {
                // offset the test point slightly inward of region i
                if (polygon_signed_distance(out[j].poly, p) < -1e-6)
                    throw ValidationError("composite regions overlap");
            }
        }
    }
    return out;
}

// Splits polygon edges longer than h into equal pieces; also inserts vertices
// of other regions that lie on an edge so shared interfaces subdivide
// identically on both sides.
std::vector<Vec2> refine_polygon(const std::vector<Vec2>& poly, double h,
                                 const std::vector<Vec2>& foreign) {
    std::vector<Vec2> out;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        Vec2 d = b - a;
        double len = d.norm();
        out.push_back(a);
        // collect foreign points strictly inside this edge
        std::vector<std::pair<double, Vec2>> splits;
        for (const auto& f : foreign) {
            double t = d.dot(f - a) / (len * len);
            if (t <= 1e-9 || t >= 1.0 - 1e-9) continue;
            Vec2 proj = a + t * d;
            if ((proj - f).norm() < 1e-9) splits.push_back({t, f});
        }
        std::sort(splits.begin(), splits.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        Vec2 prev = a;
        // interior points are lerped from the lexicographically smaller endpoint
        // so both sides of a shared interface compute bit-identical samples
        auto emit_subdivided = [&](const Vec2& from, const Vec2& to) {
            double seg = (to - from).norm();
            int k = std::max(1, static_cast<int>(std::ceil(seg / h - 1e-9)));
            bool fwd = from.x() < to.x() || (from.x() == to.x() && from.y() < to.y());
            for (int s = 1; s < k; ++s) {
                Vec2 p = fwd ? Vec2(from + (to - from) * (static_cast<double>(s) / k))
                             : Vec2(to + (from - to) * (static_cast<double>(k - s) / k));
                out.push_back(p);
            }
        };
        for (const auto& [t, f] : splits) {
            emit_subdivided(prev, f);
            out.push_back(f);
            prev = f;
        }
        emit_subdivided(prev, b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay triangulation.

struct DelaunayTri {
    int a, b, c;
    Vec2 cc;       // circumcenter
    double r2;     // squared circumradius
    bool alive = true;
};

bool circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, Vec2& center, double& r2) {
    Vec2 ab = b - a, ac = c - a;
    double d = 2.0 * cross2(ab, ac);
    if (std::abs(d) < 1e-18) return false;
    double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
    Vec2 rel((ac.y() * ab2 - ab.y() * ac2) / d, (ab.x() * ac2 - ac.x() * ab2) / d);
    center = a + rel;
    r2 = rel.squaredNorm();
    return true;
}

std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& pts) {
    double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
    for (const auto& p : pts) {
        lo_x = std::min(lo_x, p.x()); hi_x = std::max(hi_x, p.x());
        lo_y = std::min(lo_y, p.y()); hi_y = std::max(hi_y, p.y());
    }
    double span = std::max(hi_x - lo_x, hi_y - lo_y) + 1e-12;
    Vec2 mid((lo_x + hi_x) / 2, (lo_y + hi_y) / 2);

    std::vector<Vec2> v = pts;
    int n = static_cast<int>(pts.size());
    v.push_back(mid + Vec2(0, 40 * span));
    v.push_back(mid + Vec2(-40 * span, -20 * span));
    v.push_back(mid + Vec2(40 * span, -20 * span));

    std::vector<DelaunayTri> tris;
    auto add_tri = [&](int a, int b, int c) {
        DelaunayTri t{a, b, c, Vec2::Zero(), 0.0, true};
        if (cross2(v[b] - v[a], v[c] - v[a]) < 0) std::swap(t.b, t.c);
        if (!circumcircle(v[t.a], v[t.b], v[t.c], t.cc, t.r2)) t.r2 = 1e60;  // degenerate: swallow everything
        tris.push_back(t);
    };
    add_tri(n, n + 1, n + 2);

    std::vector<int> bad;
    std::map<std::pair<int, int>, int> edge_count;
    for (int ip = 0; ip < n; ++ip) {
        const Vec2& p = v[ip];
        bad.clear();
        for (int ti = 0; ti < static_cast<int>(tris.size()); ++ti) {
            auto& t = tris[ti];
            if (!t.alive) continue;
            if ((p - t.cc).squaredNorm() <= t.r2 * (1.0 + 1e-12)) bad.push_back(ti);
        }
        edge_count.clear();
        auto note_edge = [&](int a, int b) {
            auto key = std::minmax(a, b);
            edge_count[{key.first, key.second}]++;
        };
        for (int ti : bad) {
            auto& t = tris[ti];
            note_edge(t.a, t.b);
            note_edge(t.b, t.c);
            note_edge(t.c, t.a);
            t.alive = false;
        }
        // cavity boundary = edges seen exactly once
        for (int ti : bad) {
            auto& t = tris[ti];
            std::array<std::pair<int, int>, 3> edges = {{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
            for (auto [a, b] : edges) {
                auto key = std::minmax(a, b);
                if (edge_count[{key.first, key.second}] == 1) add_tri(a, b, ip);
            }
        }
        if ((ip & 63) == 63) {  // periodic compaction keeps scans short
            std::vector<DelaunayTri> live;
            live.reserve(tris.size());
            for (auto& t : tris)
                if (t.alive) live.push_back(t);
            tris.swap(live);
        }
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches super-triangle
        out.push_back({t.a, t.b, t.c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-region meshing: boundary samples + jittered hex lattice interior,
// Delaunay, inside filter, Laplacian smoothing, quality retry loop.

struct RegionMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    int boundary_count = 0;  // vertices[0..boundary_count) are the boundary ring
    int region_id = 0;
};

double worst_quality(const std::vector<Vec2>& v, const std::vector<std::array<int, 3>>& tris) {
    double q = 1.0;
    for (const auto& t : tris) q = std::min(q, triangle_quality(v[t[0]], v[t[1]], v[t[2]]));
    return q;
}

RegionMesh mesh_region(const std::vector<Vec2>& boundary, int region_id, double h, uint64_t seed) {
    RegionMesh rm;
    rm.region_id = region_id;
    const int attempts = 8;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        Rng rng(hash_combine(seed, 0xA17Au + attempt));
        std::vector<Vec2> pts = boundary;
        int nb = static_cast<int>(boundary.size());

        double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
        for (const auto& p : boundary) {
            lo_x = std::min(lo_x, p.x()); hi_x = std::max(hi_x, p.x());
            lo_y = std::min(lo_y, p.y()); hi_y = std::max(hi_y, p.y());
        }
        double row_h = h * std::sqrt(3.0) / 2.0;
        double ox = rng.uniform(0.0, h);
        double oy = rng.uniform(0.0, row_h);
        int rows = static_cast<int>((hi_y - lo_y) / row_h) + 2;
        int cols = static_cast<int>((hi_x - lo_x) / h) + 2;
        for (int r = 0; r < rows; ++r) {
            double y = lo_y + oy + r * row_h;
            for (int cidx = 0; cidx < cols; ++cidx) {
                double x = lo_x + ox + cidx * h + (r % 2 ? h / 2 : 0.0);
                Vec2 p(x + rng.uniform(-0.08, 0.08) * h, y + rng.uniform(-0.08, 0.08) * h);
                if (polygon_signed_distance(boundary, p) <= -0.72 * h) pts.push_back(p);
            }
        }

        auto tris = delaunay(pts);
        // drop triangles outside the (possibly concave) region
        std::vector<std::array<int, 3>> kept;
        for (const auto& t : tris) {
            Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
            if (polygon_signed_distance(boundary, c) < 0.0) kept.push_back(t);
        }

        // Laplacian smoothing of interior vertices, then re-triangulate
        for (int pass = 0; pass < 4; ++pass) {
            std::vector<Vec2> acc(pts.size(), Vec2::Zero());
            std::vector<int> cnt(pts.size(), 0);
            for (const auto& t : kept) {
                for (int i = 0; i < 3; ++i) {
                    int u = t[i], w = t[(i + 1) % 3];
                    acc[u] += pts[w]; cnt[u]++;
                    acc[w] += pts[u]; cnt[w]++;
                }
            }
            for (size_t i = nb; i < pts.size(); ++i) {
                if (cnt[i] == 0) continue;
                Vec2 target = acc[i] / cnt[i];
                if (polygon_signed_distance(boundary, target) <= -0.5 * h) pts[i] = target;
            }
            tris = delaunay(pts);
            kept.clear();
            for (const auto& t : tris) {
                Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
                if (polygon_signed_distance(boundary, c) < 0.0) kept.push_back(t);
            }
        }

        // drop unused interior vertices (outside-lattice points already filtered;
        // smoothing can orphan none, but keep the mesh tight anyway)
        std::vector<int> remap(pts.size(), -1);
        for (int i = 0; i < nb; ++i) remap[i] = i;
        std::vector<Vec2> vout(pts.begin(), pts.begin() + nb);
        for (const auto& t : kept)
            for (int vid : t)
                if (remap[vid] < 0) {
                    remap[vid] = static_cast<int>(vout.size());
                    vout.push_back(pts[vid]);
                }
        std::vector<std::array<int, 3>> tout;
        tout.reserve(kept.size());
        for (const auto& t : kept) tout.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

        // verify boundary conformity: every boundary segment must be a mesh edge
        std::set<std::pair<int, int>> edges;
        for (const auto& t : tout)
            for (int i = 0; i < 3; ++i) {
                auto key = std::minmax(t[i], t[(i + 1) % 3]);
                edges.insert({key.first, key.second});
            }
        bool conforming = true;
        for (int i = 0; i < nb; ++i) {
            auto key = std::minmax(i, (i + 1) % nb);
            if (!edges.count({key.first, key.second})) { conforming = false; break; }
        }
        if (!conforming) continue;
        if (worst_quality(vout, tout) < 0.2) continue;

        rm.vertices = std::move(vout);
        rm.triangles = std::move(tout);
        rm.boundary_count = nb;
        return rm;
    }
    throw ValidationError("meshing failed to reach quality 0.2 on a region");
}

}  // namespace

// ---------------------------------------------------------------------------

const char* shape_kind_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::Disk: return "disk";
        case ShapeKind::Box: return "box";
        case ShapeKind::RoundedBox: return "rounded-box";
        case ShapeKind::Ellipse: return "ellipse";
        case ShapeKind::Capsule: return "capsule";
        case ShapeKind::LShape: return "L-shape";
        case ShapeKind::TShape: return "T-shape";
        case ShapeKind::AnnulusSector: return "annulus-sector";
        case ShapeKind::Star: return "star";
        case ShapeKind::Composite: return "composite";
    }
    return "?";
}

ShapeKind shape_kind_from_name(const std::string& name) {
    static const std::map<std::string, ShapeKind> table = {
        {"disk", ShapeKind::Disk},
        {"box", ShapeKind::Box},
        {"rounded-box", ShapeKind::RoundedBox},
        {"ellipse", ShapeKind::Ellipse},
        {"capsule", ShapeKind::Capsule},
        {"L-shape", ShapeKind::LShape},
        {"T-shape", ShapeKind::TShape},
        {"annulus-sector", ShapeKind::AnnulusSector},
        {"star", ShapeKind::Star},
        {"composite", ShapeKind::Composite},
    };
    auto it = table.find(name);
    if (it == table.end()) throw ValidationError("unknown shape kind: " + name);
    return it->second;
}

double ShapeSpec::min_feature() const {
    switch (kind) {
        case ShapeKind::Disk: return a;
        case ShapeKind::Box: return std::min(a, b) / 2;
        case ShapeKind::RoundedBox: return std::min({a, b}) / 2 - c / 2;
        case ShapeKind::Ellipse: return std::min(a, b);
        case ShapeKind::Capsule: return b;
        case ShapeKind::LShape:
        case ShapeKind::TShape: return c / 2;
        case ShapeKind::AnnulusSector: return (a - b) / 2;
        case ShapeKind::Star: {
            // narrowest part of a point near the tip
            double gap = 2.0 * b * std::sin(kPi / (2 * n));
            return std::min(gap, (a - b) / 2);
        }
        case ShapeKind::Composite: {
            double m = 1e30;
            for (const auto& r : regions) {
                ShapeSpec sub;
                sub.kind = r.kind; sub.a = r.a; sub.b = r.b; sub.c = r.c; sub.n = r.n;
                m = std::min(m, sub.min_feature());
            }
            return m;
        }
    }
    return 0.0;
}

double ShapeSpec::diameter() const {
    switch (kind) {
        case ShapeKind::Disk: return 2 * a;
        case ShapeKind::Box: return std::hypot(a, b);
        case ShapeKind::RoundedBox: return std::hypot(a, b);
        case ShapeKind::Ellipse: return 2 * std::max(a, b);
        case ShapeKind::Capsule: return a + 2 * b;
        case ShapeKind::LShape:
        case ShapeKind::TShape: return std::hypot(a, b);
        case ShapeKind::AnnulusSector: return 2 * a;
        case ShapeKind::Star: return 2 * a;
        case ShapeKind::Composite: {
            double m = 0;
            for (const auto& r : regions) {
                ShapeSpec sub;
                sub.kind = r.kind; sub.a = r.a; sub.b = r.b; sub.c = r.c; sub.n = r.n;
                m = std::max(m, sub.diameter() + 2 * r.offset.norm());
            }
            return m;
        }
    }
    return 0.0;
}

std::string ShapeSpec::describe() const {
    std::ostringstream os;
    os << shape_kind_name(kind) << "(a=" << format_double(a) << ",b=" << format_double(b)
       << ",c=" << format_double(c) << ",n=" << n << ",height=" << format_double(height);
    for (const auto& r : regions) {
        os << ";region" << r.region_id << "=" << shape_kind_name(r.kind) << "[a=" << format_double(r.a)
           << ",b=" << format_double(r.b) << ",c=" << format_double(r.c) << ",n=" << r.n
           << ",ox=" << format_double(r.offset.x()) << ",oy=" << format_double(r.offset.y()) << "]";
    }
    os << ")";
    return os.str();
}

double PlanarMesh::total_area() const {
    double s = 0;
    for (const auto& t : triangles)
        s += 0.5 * cross2(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
    return s;
}

Vec2 PlanarMesh::centroid() const {
    double s = 0;
    Vec2 c = Vec2::Zero();
    for (const auto& t : triangles) {
        double a = 0.5 * cross2(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
        c += a * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
        s += a;
    }
    return c / s;
}

int PlanarMesh::num_regions() const {
    int m = 0;
    for (int r : vertex_region) m = std::max(m, r + 1);
    return m;
}

double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c) {
    double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    double s = (la + lb + lc) / 2;
    double area = std::abs(0.5 * cross2(b - a, c - a));
    if (area < 1e-30 || s < 1e-30) return 0.0;
    double inr = area / s;
    double circ = la * lb * lc / (4 * area);
    return inr / circ;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double s = 0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) s += cross2(poly[i], poly[(i + 1) % n]);
    return s / 2;
}

double polygon_signed_distance(const std::vector<Vec2>& poly, const Vec2& p) {
    size_t n = poly.size();
    double d2 = 1e300;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        Vec2 e = b - a;
        double t = e.squaredNorm() > 0 ? std::clamp(e.dot(p - a) / e.squaredNorm(), 0.0, 1.0) : 0.0;
        d2 = std::min(d2, (p - (a + t * e)).squaredNorm());
        // crossing-number parity
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    double d = std::sqrt(d2);
    return inside ? -d : d;
}

double signed_distance(const PlanarMesh& mesh, const Vec2& point) {
    std::vector<Vec2> poly;
    poly.reserve(mesh.boundary_loop.size());
    for (int vid : mesh.boundary_loop) poly.push_back(mesh.vertices[vid]);
    return polygon_signed_distance(poly, point);
}

std::vector<Vec2> boundary_normals(const PlanarMesh& mesh) {
    const auto& loop = mesh.boundary_loop;
    size_t n = loop.size();
    std::vector<Vec2> normals(n);
    for (size_t i = 0; i < n; ++i) {
        const Vec2& prev = mesh.vertices[loop[(i + n - 1) % n]];
        const Vec2& cur = mesh.vertices[loop[i]];
        const Vec2& next = mesh.vertices[loop[(i + 1) % n]];
        // CCW loop: outward normal of edge (a->b) is (dy, -dx) normalized
        Vec2 e0 = cur - prev, e1 = next - cur;
        Vec2 n0(e0.y(), -e0.x()), n1(e1.y(), -e1.x());
        n0.normalize();
        n1.normalize();
        Vec2 bis = n0 + n1;
        if (bis.norm() < 1e-12) bis = n1;  // 180-degree fold; pick either side
        normals[i] = bis.normalized();
    }
    return normals;
}

PlanarMesh generate_shape(const ShapeSpec& spec, double target_edge_length, uint64_t seed) {
    if (!(target_edge_length > 0)) throw ValidationError("target edge length must be > 0");
    double feat = spec.min_feature();
    if (target_edge_length >= feat)
        throw ValidationError("target edge length " + format_double(target_edge_length) +
                              " not below min feature size " + format_double(feat));

    auto regions = build_region_polys(spec, target_edge_length);

    // refine region polygons; pass other regions' vertices so shared interfaces
    // get identical subdivisions
    std::vector<RegionMesh> rmeshes;
    for (size_t i = 0; i < regions.size(); ++i) {
        std::vector<Vec2> foreign;
        for (size_t j = 0; j < regions.size(); ++j)
            if (j != i) foreign.insert(foreign.end(), regions[j].poly.begin(), regions[j].poly.end());
        auto refined = refine_polygon(regions[i].poly, target_edge_length, foreign);
        if (polygon_area(refined) < 0) std::reverse(refined.begin(), refined.end());
        rmeshes.push_back(mesh_region(refined, regions[i].region_id,
                                      target_edge_length, hash_combine(seed, 1000 + i)));
    }

    // merge region meshes, welding vertices that coincide exactly or within
    // a tight tolerance (interface points are computed identically per side)
    PlanarMesh mesh;
    mesh.extrusion_height = spec.height;
    auto weld_key = [](const Vec2& p) {
        return std::make_pair(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9));
    };
    std::map<std::pair<long long, long long>, int> weld;
    for (const auto& rm : rmeshes) {
        std::vector<int> remap(rm.vertices.size());
        for (size_t i = 0; i < rm.vertices.size(); ++i) {
            auto key = weld_key(rm.vertices[i]);
            auto it = weld.find(key);
            if (it != weld.end()) {
                remap[i] = it->second;
                mesh.vertex_region[it->second] = std::min(mesh.vertex_region[it->second], rm.region_id);
            } else {
                remap[i] = mesh.num_vertices();
                weld[key] = remap[i];
                mesh.vertices.push_back(rm.vertices[i]);
                mesh.vertex_region.push_back(rm.region_id);
            }
        }
        for (const auto& t : rm.triangles) {
            std::array<int, 3> tt = {remap[t[0]], remap[t[1]], remap[t[2]]};
            if (cross2(mesh.vertices[tt[1]] - mesh.vertices[tt[0]],
                       mesh.vertices[tt[2]] - mesh.vertices[tt[0]]) < 0)
                std::swap(tt[1], tt[2]);
            mesh.triangles.push_back(tt);
            mesh.triangle_region.push_back(rm.region_id);
        }
    }

    // boundary loop: edges used exactly once, chained into a single CCW loop
    std::map<std::pair<int, int>, int> edge_use;
    std::map<std::pair<int, int>, std::pair<int, int>> directed;  // undirected -> as-seen direction
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            auto key = std::minmax(a, b);
            edge_use[{key.first, key.second}]++;
            directed[{key.first, key.second}] = {a, b};
        }
    }
    std::map<int, int> next_on_boundary;
    int start = -1;
    for (const auto& [key, cnt] : edge_use) {
        if (cnt != 1) continue;
        auto [a, b] = directed[key];
        // CCW triangles walk the outer boundary in CCW order
        if (next_on_boundary.count(a))
            throw ValidationError("boundary is not a simple loop");
        next_on_boundary[a] = b;
        start = a;
    }
    if (start < 0) throw ValidationError("mesh has no boundary");
    std::vector<int> loop;
    int cur = start;
    do {
        loop.push_back(cur);
        auto it = next_on_boundary.find(cur);
        if (it == next_on_boundary.end()) throw ValidationError("boundary loop broken");
        cur = it->second;
    } while (cur != start && loop.size() <= next_on_boundary.size());
    if (loop.size() != next_on_boundary.size())
        throw ValidationError("boundary loop is not connected (composite regions disjoint?)");
    mesh.boundary_loop = std::move(loop);

    // every vertex referenced
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const auto& t : mesh.triangles)
        for (int vid : t) used[vid] = 1;
    for (char u : used)
        if (!u) throw ValidationError("orphan vertex after meshing");

    return mesh;
}

std::string mesh_to_obj(const PlanarMesh& mesh) {
    std::ostringstream os;
    for (const auto& v : mesh.vertices)
        os << "v " << format_double(v.x()) << " " << format_double(v.y()) << " 0\n";
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    return os.str();
}

std::vector<ShapeSpec> shape_library() {
    std::vector<ShapeSpec> lib(13);
    auto& L = lib;
    L[0].kind = ShapeKind::Disk;          L[0].a = 0.016;
    L[1].kind = ShapeKind::Disk;          L[1].a = 0.0125;
    L[2].kind = ShapeKind::Box;           L[2].a = 0.046; L[2].b = 0.022;
    L[3].kind = ShapeKind::Box;           L[3].a = 0.03;  L[3].b = 0.03;
    L[4].kind = ShapeKind::RoundedBox;    L[4].a = 0.05;  L[4].b = 0.028; L[4].c = 0.008;
    L[5].kind = ShapeKind::Ellipse;       L[5].a = 0.026; L[5].b = 0.015;
    L[6].kind = ShapeKind::Capsule;       L[6].a = 0.034; L[6].b = 0.011;
    L[7].kind = ShapeKind::LShape;        L[7].a = 0.052; L[7].b = 0.052; L[7].c = 0.02;
    L[8].kind = ShapeKind::TShape;        L[8].a = 0.054; L[8].b = 0.05;  L[8].c = 0.019;
    L[9].kind = ShapeKind::AnnulusSector; L[9].a = 0.028; L[9].b = 0.014; L[9].c = 4.0;
    L[10].kind = ShapeKind::Star;         L[10].a = 0.026; L[10].b = 0.013; L[10].n = 5;
    L[11].kind = ShapeKind::Star;         L[11].a = 0.024; L[11].b = 0.014; L[11].n = 6;
    // bimaterial bar: handle + head boxes flush at x = 0
    L[12].kind = ShapeKind::Composite;
    {
        ShapeSpec::Region handle;
        handle.kind = ShapeKind::Box; handle.a = 0.036; handle.b = 0.02;
        handle.offset = Vec2(-0.018, 0.0); handle.region_id = 0;
        ShapeSpec::Region head;
        head.kind = ShapeKind::Box; head.a = 0.024; head.b = 0.02;
        head.offset = Vec2(0.012, 0.0); head.region_id = 1;
        L[12].regions = {handle, head};
    }
    return lib;
}

ShapeSpec jitter_shape(const ShapeSpec& base, double fraction, uint64_t seed) {
    Rng rng(hash_combine(seed, 0x57A9Eull));
    ShapeSpec s = base;
    auto j = [&](double v) { return v * (1.0 + fraction * (2.0 * rng.uniform() - 1.0)); };
    if (s.kind == ShapeKind::Composite) {
        double common_b = j(s.regions[0].b);
        for (auto& r : s.regions) {
            r.a = j(r.a);
            r.b = common_b;
        }
        // keep the two bars flush at x = 0
        if (s.regions.size() == 2) {
            s.regions[0].offset = Vec2(-s.regions[0].a / 2, 0.0);
            s.regions[1].offset = Vec2(s.regions[1].a / 2, 0.0);
        }
        return s;
    }
    s.a = j(s.a);
    s.b = j(s.b);
    if (s.kind == ShapeKind::RoundedBox || s.kind == ShapeKind::LShape ||
        s.kind == ShapeKind::TShape || s.kind == ShapeKind::AnnulusSector)
        s.c = j(s.c);
    return s;
}

}  // namespace stiffgrasp::geom
