#include "rfrecon/tracer.hpp"

#include <algorithm>
#include <cmath>

#include "rfrecon/errors.hpp"
#include "rfrecon/rng.hpp"

namespace rfrecon {

namespace {

constexpr double kGeomTol = 1e-9;

struct CVec3 {
    cplx x{0.0, 0.0}, y{0.0, 0.0}, z{0.0, 0.0};
};

CVec3 operator*(const cplx& s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
CVec3 operator+(const CVec3& a, const CVec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
CVec3 operator*(const cplx& s, const CVec3& v) { return {s * v.x, s * v.y, s * v.z}; }
cplx dot(const CVec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 any_perpendicular(const Vec3& k) {
    Vec3 ref = std::abs(k.x) <= std::abs(k.y) && std::abs(k.x) <= std::abs(k.z)
                   ? Vec3{1, 0, 0}
                   : (std::abs(k.y) <= std::abs(k.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    return normalized(cross(ref, k));
}

// Spherical basis for a propagation/arrival direction: h = azimuth unit vector,
// v = elevation unit vector. Degenerate for vertical directions; the azimuth-0
// fallback keeps it defined and consistent.
void polarization_basis(const Vec3& dir, Vec3* h, Vec3* v) {
    double az = std::atan2(dir.y, dir.x);
    double el = std::asin(std::clamp(dir.z, -1.0, 1.0));
    double ca = std::cos(az), sa = std::sin(az);
    double ce = std::cos(el), se = std::sin(el);
    *h = {-sa, ca, 0.0};
    *v = {-se * ca, -se * sa, ce};
}

// Fresnel reflection coefficients for incidence from air onto a half-space of
// complex relative permittivity eta, with cos(theta) of the incidence angle.
void fresnel(const cplx& eta, double cos_theta, cplx* gamma_te, cplx* gamma_tm) {
    double sin2 = std::max(0.0, 1.0 - cos_theta * cos_theta);
    cplx w = std::sqrt(eta - sin2);
    *gamma_te = (cos_theta - w) / (cos_theta + w);
    *gamma_tm = (eta * cos_theta - w) / (eta * cos_theta + w);
}

// Reflects a complex field vector: TE component scaled by gte, TM by gtm,
// re-expressed along the outgoing TM basis.
CVec3 reflect_field(const CVec3& e, const Vec3& k_in, const Vec3& k_out, const Vec3& n,
                    const cplx& gte, const cplx& gtm) {
    Vec3 s = cross(k_in, n);
    double sn = norm(s);
    s = sn < 1e-12 ? any_perpendicular(k_in) : s / sn;
    Vec3 p_in = cross(s, k_in);
    Vec3 p_out = cross(s, k_out);
    cplx es = dot(e, s);
    cplx ep = dot(e, p_in);
    return gte * es * s + (gtm * ep) * p_out;
}

struct TracerContext {
    const SceneRecord* scene;
    const SimulationConfig* config;
    const RISCodebook* codebook;
    int entry;
    std::vector<Wall> walls;
    std::vector<int> panel_offset;  // per wall id, -1 when not RIS
    double k0;
    double amp_scale;  // sqrt(Ptx) * lambda / (4 pi), divided by d_total per path
    cplx wall_eta[6];
    std::vector<cplx> sphere_eta;
};

// ---------------------------------------------------------------------------
// Geometry helpers

// Folds the specular path source -> walls(seq) -> receiver. On success fills
// `points` with the bounce points in traversal order (source side first).
bool fold_wall_sequence(const TracerContext& ctx, const Vec3& source, const Vec3& receiver,
                        const std::vector<int>& seq, std::vector<Vec3>* points) {
    const std::size_t k = seq.size();
    points->clear();
    if (k == 0) return true;

    // Successive images of the source.
    static thread_local std::vector<Vec3> images;
    images.clear();
    images.push_back(source);
    for (int wid : seq) images.push_back(reflect_point(images.back(), ctx.walls[std::size_t(wid)]));

    // Walk backwards from the receiver through the planes.
    points->resize(k);
    Vec3 cur = receiver;
    for (std::size_t i = k; i-- > 0;) {
        const Wall& w = ctx.walls[std::size_t(seq[i])];
        const Vec3& img = images[i + 1];
        double f_cur = dot(cur - w.origin, w.normal);
        double f_img = dot(img - w.origin, w.normal);
        if (f_cur <= kGeomTol || f_img >= -kGeomTol) return false;  // must cross front to back
        double t = f_cur / (f_cur - f_img);
        if (t <= kGeomTol || t >= 1.0 - kGeomTol) return false;
        Vec3 q = cur + t * (img - cur);
        double u = dot(q - w.origin, w.u_axis);
        double v = dot(q - w.origin, w.v_axis);
        if (u < -kGeomTol || u > w.lu + kGeomTol || v < -kGeomTol || v > w.lv + kGeomTol)
            return false;
        (*points)[i] = q;
        cur = q;
    }
    return true;
}

// Blocking test for one path polyline. Vertices touching a sphere bounce carry
// that sphere's index in bounce_sphere (-1 otherwise); the adjacent segments
// skip it (a valid external reflection touches its sphere only at the bounce).
bool occluded(const TracerContext& ctx, const std::vector<Vec3>& pts,
              const std::vector<int>& bounce_sphere) {
    const auto& spheres = ctx.scene->spheres;
    if (spheres.empty()) return false;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        int skip_a = bounce_sphere[i];
        int skip_b = bounce_sphere[i + 1];
        for (std::size_t s = 0; s < spheres.size(); ++s) {
            if (int(s) == skip_a || int(s) == skip_b) continue;
            const Sphere& sp = spheres[s].sphere;
            double t;
            double dist = segment_point_distance(pts[i], pts[i + 1], sp.center, &t);
            if (dist < sp.radius * (1.0 - 1e-9) && t > 1e-9 && t < 1.0 - 1e-9) return true;
        }
    }
    return false;
}

}  // namespace

bool sphere_specular_point(const Vec3& a, const Vec3& b, const Vec3& center, double radius,
                           Vec3* point) {
    Vec3 va = a - center;
    Vec3 vb = b - center;
    double da = norm(va);
    double db = norm(vb);
    if (da <= radius * (1.0 + 1e-12) || db <= radius * (1.0 + 1e-12)) return false;

    Vec3 e1 = va / da;
    Vec3 w = vb - dot(vb, e1) * e1;
    double wn = norm(w);
    double gamma = std::atan2(wn, dot(vb, e1));  // angle between va and vb, in [0, pi]

    if (wn < 1e-12) {
        if (gamma < M_PI / 2.0) {
            // Collinear on the same side: retro-reflection at the near pole.
            *point = center + radius * e1;
            return true;
        }
        return false;  // antipodal through the sphere: no external bounce
    }
    Vec3 e2 = w / wn;

    // Reflection condition on the arc alpha in (0, gamma):
    // h(alpha) = n.unit(a-p) - n.unit(b-p), h(0) >= 0 >= h(gamma).
    auto h = [&](double alpha) {
        Vec3 n{0, 0, 0};
        Vec3 p = center + radius * (std::cos(alpha) * e1 + std::sin(alpha) * e2);
        n = (p - center) / radius;
        return dot(n, normalized(a - p)) - dot(n, normalized(b - p));
    };
    double lo = 0.0, hi = gamma;
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    double alpha = 0.5 * (lo + hi);
    Vec3 p = center + radius * (std::cos(alpha) * e1 + std::sin(alpha) * e2);

    // Both endpoints must see the bounce point from outside its tangent plane.
    if (da * std::cos(alpha) <= radius * (1.0 + 1e-12)) return false;
    if (db * std::cos(gamma - alpha) <= radius * (1.0 + 1e-12)) return false;
    *point = p;
    return true;
}

namespace {

// ---------------------------------------------------------------------------
// Path assembly

struct Candidate {
    std::vector<Vec3> pts;          // tx, bounces..., antenna
    std::vector<int> bounce_sphere; // per vertex, -1 unless a sphere bounce
    std::vector<Interaction> inter; // per bounce vertex
    double d_total = 0.0;
    double d_out = 0.0;             // unfolded distance after the sphere bounce
    int sphere = -1;
};

// Classifies a wall hit as RIS panel or plain wall and counts RIS hits.
Interaction wall_interaction(const TracerContext& ctx, int wall_id, const Vec3& q,
                             bool* is_ris, int* panel_index) {
    const Wall& w = ctx.walls[std::size_t(wall_id)];
    *is_ris = false;
    *panel_index = -1;
    if (w.ris) {
        double u = dot(q - w.origin, w.u_axis) - w.margin_u;
        double v = dot(q - w.origin, w.v_axis) - w.margin_v;
        double ps = ctx.config->panel_size;
        if (u >= 0.0 && v >= 0.0) {
            int iu = int(u / ps);
            int iv = int(v / ps);
            if (iu < w.nu && iv < w.nv) {
                *is_ris = true;
                *panel_index = ctx.panel_offset[std::size_t(wall_id)] + iv * w.nu + iu;
                return {Interaction::Kind::ris_panel, wall_id, iu + w.nu * iv};
            }
        }
    }
    return {Interaction::Kind::wall, wall_id, 0};
}

// Builds the PathComponent for a validated, unoccluded candidate: composes the
// Jones matrix along the polyline and fills delays and arrival angles.
PathComponent finish_path(const TracerContext& ctx, const Candidate& cand, int antenna) {
    const std::size_t nseg = cand.pts.size() - 1;
    Vec3 k0_dir = normalized(cand.pts[1] - cand.pts[0]);

    Vec3 h_tx, v_tx;
    polarization_basis(k0_dir, &h_tx, &v_tx);
    CVec3 eh = cplx(1.0, 0.0) * h_tx;  // field from unit h excitation
    CVec3 ev = cplx(1.0, 0.0) * v_tx;

    Vec3 k_in = k0_dir;
    for (std::size_t b = 0; b < cand.inter.size(); ++b) {
        const Vec3& q = cand.pts[b + 1];
        Vec3 k_out = normalized(cand.pts[b + 2] - q);
        const Interaction& it = cand.inter[b];
        cplx gte, gtm;
        if (it.kind == Interaction::Kind::sphere) {
            const SpherePrimitive& sp = ctx.scene->spheres[std::size_t(it.id)];
            Vec3 n = normalized(q - sp.sphere.center);
            double ct = -rfrecon::dot(k_in, n);
            fresnel(ctx.sphere_eta[std::size_t(it.id)], ct, &gte, &gtm);
            double div = sp.sphere.radius / (sp.sphere.radius + 2.0 * cand.d_out);
            eh = reflect_field(eh, k_in, k_out, n, gte * div, gtm * div);
            ev = reflect_field(ev, k_in, k_out, n, gte * div, gtm * div);
        } else {
            const Wall& w = ctx.walls[std::size_t(it.id)];
            double ct = -rfrecon::dot(k_in, w.normal);
            if (it.kind == Interaction::Kind::ris_panel) {
                // Metal-backed phase plate: metal Fresnel times e^{j phi(q)}.
                const MaterialSpec metal{"", 1.0, 1e7, 0};
                fresnel(complex_permittivity(metal, ctx.config->f_c), ct, &gte, &gtm);
                int panel = ctx.panel_offset[std::size_t(it.id)] + it.sub;
                Vec3 grad = ctx.codebook->phase_gradient(ctx.entry, panel, ctx.k0);
                const Vec3& pc = ctx.codebook->panels[std::size_t(panel)].center;
                double phi = rfrecon::dot(grad, q - pc);
                cplx ph = std::polar(1.0, phi);
                gte *= ph;
                gtm *= ph;
            } else {
                fresnel(ctx.wall_eta[it.id], ct, &gte, &gtm);
            }
            eh = reflect_field(eh, k_in, k_out, w.normal, gte, gtm);
            ev = reflect_field(ev, k_in, k_out, w.normal, gte, gtm);
        }
        k_in = k_out;
    }

    // Arrival: direction from the antenna toward where the wave comes from.
    Vec3 k_last = normalized(cand.pts[nseg] - cand.pts[nseg - 1]);
    Vec3 arr = -k_last;
    Vec3 h_rx, v_rx;
    polarization_basis(arr, &h_rx, &v_rx);

    double amp = ctx.amp_scale / cand.d_total;
    PathComponent pc;
    pc.rx_antenna = antenna;
    pc.path_length = cand.d_total;
    pc.delay = cand.d_total / ctx.config->c0;
    pc.azimuth = std::atan2(arr.y, arr.x);
    pc.elevation = std::asin(std::clamp(arr.z, -1.0, 1.0));
    pc.jones.hh = amp * dot(eh, h_rx);
    pc.jones.hv = amp * dot(ev, h_rx);
    pc.jones.vh = amp * dot(eh, v_rx);
    pc.jones.vv = amp * dot(ev, v_rx);
    pc.interactions = cand.inter;
    pc.vertices = cand.pts;
    return pc;
}

// Enumerates wall-id sequences of the given length without immediate repeats,
// in lexicographic order.
void enumerate_wall_sequences(int length, std::vector<std::vector<int>>* out) {
    std::vector<int> seq;
    seq.resize(std::size_t(length));
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == length) {
            out->push_back(seq);
            return;
        }
        for (int w = 0; w < 6; ++w) {
            if (depth > 0 && seq[std::size_t(depth - 1)] == w) continue;
            seq[std::size_t(depth)] = w;
            self(self, depth + 1);
        }
    };
    rec(rec, 0);
}

// Candidate -> validated path (interaction labels, RIS cap, occlusion).
bool accept_candidate(const TracerContext& ctx, Candidate* cand,
                      const std::vector<int>& pre_seq, const std::vector<int>& post_seq,
                      const std::vector<Vec3>& pre_pts, const std::vector<Vec3>& post_pts,
                      const Vec3& tx, const Vec3& antenna, const Vec3* sphere_pt) {
    cand->pts.clear();
    cand->bounce_sphere.clear();
    cand->inter.clear();

    cand->pts.push_back(tx);
    cand->bounce_sphere.push_back(-1);
    int ris_hits = 0;
    auto add_wall = [&](int wid, const Vec3& q) {
        bool is_ris;
        int panel;
        Interaction it = wall_interaction(ctx, wid, q, &is_ris, &panel);
        if (is_ris) ++ris_hits;
        cand->inter.push_back(it);
        cand->pts.push_back(q);
        cand->bounce_sphere.push_back(-1);
    };
    for (std::size_t i = 0; i < pre_seq.size(); ++i) add_wall(pre_seq[i], pre_pts[i]);
    if (sphere_pt) {
        cand->inter.push_back({Interaction::Kind::sphere, cand->sphere, 0});
        cand->pts.push_back(*sphere_pt);
        cand->bounce_sphere.push_back(cand->sphere);
    }
    for (std::size_t i = 0; i < post_seq.size(); ++i) add_wall(post_seq[i], post_pts[i]);
    cand->pts.push_back(antenna);
    cand->bounce_sphere.push_back(-1);

    if (ris_hits > ctx.config->ris_max_hits) return false;
    return !occluded(ctx, cand->pts, cand->bounce_sphere);
}

}  // namespace

std::vector<AntennaPaths> trace_paths(const SceneRecord& scene, const SimulationConfig& config,
                                      const RISCodebook& codebook, int entry,
                                      const std::vector<MaterialSpec>& sphere_materials) {
    config.validate();
    if (entry < 0 || entry >= std::max(1, codebook.n_entries()))
        throw invalid_input("codebook entry out of range");

    TracerContext ctx;
    ctx.scene = &scene;
    ctx.config = &config;
    ctx.codebook = &codebook;
    ctx.entry = entry;
    ctx.walls = build_walls(config);
    ctx.k0 = 2.0 * M_PI / config.wavelength();
    ctx.amp_scale = std::sqrt(config.tx_power_watts()) * config.wavelength() / (4.0 * M_PI);
    for (int w = 0; w < 6; ++w)
        ctx.wall_eta[w] = complex_permittivity(ctx.walls[std::size_t(w)].material, config.f_c);
    for (const auto& sp : scene.spheres)
        ctx.sphere_eta.push_back(complex_permittivity(
            material_by_class(sphere_materials, sp.material_class), config.f_c));

    // Panel offsets must match build_panels' flattening order.
    ctx.panel_offset.assign(6, -1);
    {
        int off = 0;
        for (const Wall& w : ctx.walls) {
            if (!w.ris) continue;
            ctx.panel_offset[std::size_t(w.id)] = off;
            off += w.nu * w.nv;
        }
    }

    // Wall sequences by order, shared across antennas.
    std::vector<std::vector<std::vector<int>>> seq_by_len(std::size_t(config.max_reflections) + 1);
    seq_by_len[0] = {{}};
    for (int len = 1; len <= config.max_reflections; ++len)
        enumerate_wall_sequences(len, &seq_by_len[std::size_t(len)]);

    const Vec3 tx = config.tx_position;
    const std::vector<Vec3> antennas = config.antenna_positions();
    std::vector<AntennaPaths> result(antennas.size());

    std::vector<Vec3> pre_pts, post_pts;
    Candidate cand;
    for (std::size_t n = 0; n < antennas.size(); ++n) {
        const Vec3& rx = antennas[n];
        AntennaPaths& paths = result[n];

        // Line of sight.
        {
            cand.sphere = -1;
            cand.d_total = norm(rx - tx);
            cand.d_out = 0.0;
            if (accept_candidate(ctx, &cand, {}, {}, {}, {}, tx, rx, nullptr))
                paths.push_back(finish_path(ctx, cand, int(n)));
        }

        // Wall-only specular paths.
        for (int len = 1; len <= config.max_reflections; ++len) {
            for (const auto& seq : seq_by_len[std::size_t(len)]) {
                if (!fold_wall_sequence(ctx, tx, rx, seq, &pre_pts)) continue;
                // Unfolded length via the final source image.
                Vec3 img = tx;
                for (int wid : seq) img = reflect_point(img, ctx.walls[std::size_t(wid)]);
                cand.sphere = -1;
                cand.d_total = norm(img - rx);
                cand.d_out = 0.0;
                if (accept_candidate(ctx, &cand, seq, {}, pre_pts, {}, tx, rx, nullptr))
                    paths.push_back(finish_path(ctx, cand, int(n)));
            }
        }

        // Exactly one sphere bounce, wall bounces around it.
        for (std::size_t s = 0; s < scene.spheres.size(); ++s) {
            const Sphere& sp = scene.spheres[s].sphere;
            for (int pre_len = 0; pre_len < config.max_reflections; ++pre_len) {
                for (int post_len = 0; pre_len + post_len + 1 <= config.max_reflections;
                     ++post_len) {
                    for (const auto& pre : seq_by_len[std::size_t(pre_len)]) {
                        Vec3 a = tx;
                        for (int wid : pre) a = reflect_point(a, ctx.walls[std::size_t(wid)]);
                        for (const auto& post : seq_by_len[std::size_t(post_len)]) {
                            Vec3 b = rx;
                            for (std::size_t i = post.size(); i-- > 0;)
                                b = reflect_point(b, ctx.walls[std::size_t(post[i])]);
                            Vec3 p;
                            if (!sphere_specular_point(a, b, sp.center, sp.radius, &p)) continue;
                            if (!fold_wall_sequence(ctx, tx, p, pre, &pre_pts)) continue;
                            if (!fold_wall_sequence(ctx, p, rx, post, &post_pts)) continue;
                            cand.sphere = int(s);
                            cand.d_out = norm(p - b);
                            cand.d_total = norm(a - p) + cand.d_out;
                            if (accept_candidate(ctx, &cand, pre, post, pre_pts, post_pts, tx, rx,
                                                 &p))
                                paths.push_back(finish_path(ctx, cand, int(n)));
                        }
                    }
                }
            }
        }
    }
    return result;
}

std::vector<Jones> synthesize_wavefront(const std::vector<AntennaPaths>& paths,
                                        const SimulationConfig& config,
                                        std::uint64_t noise_seed) {
    const double two_pi_f_over_c = 2.0 * M_PI * config.f_c / config.c0;
    const double sigma2 = config.resolved_noise_variance();
    Rng rng(derive_seed(noise_seed, {0x6e6f697365ULL}));

    std::vector<Jones> out(paths.size());
    for (std::size_t n = 0; n < paths.size(); ++n) {
        Jones acc;
        for (const PathComponent& p : paths[n]) {
            cplx carrier = std::polar(1.0, -two_pi_f_over_c * p.path_length);
            acc.hh += p.jones.hh * carrier;
            acc.hv += p.jones.hv * carrier;
            acc.vh += p.jones.vh * carrier;
            acc.vv += p.jones.vv * carrier;
        }
        if (sigma2 > 0.0) {
            double s = std::sqrt(sigma2 / 2.0);
            auto noise = [&]() { return cplx(s * rng.gaussian(), s * rng.gaussian()); };
            acc.hh += noise();
            acc.hv += noise();
            acc.vh += noise();
            acc.vv += noise();
        }
        out[n] = acc;
    }
    return out;
}

}  // namespace rfrecon
