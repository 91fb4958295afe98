#include "rfrecon/sim.hpp"

#include <cmath>

#include "rfrecon/errors.hpp"

namespace rfrecon {

void SimulationConfig::validate() const {
    if (!(room.max.x > room.min.x && room.max.y > room.min.y && room.max.z > room.min.z))
        throw config_error("degenerate room box");
    if (!room.contains(tx_position)) throw config_error("tx outside room");
    if (!room.contains(rx_center)) throw config_error("rx center outside room");
    if (f_c <= 0.0 || c0 <= 0.0) throw config_error("f_c and c0 must be positive");
    if (rx_grid_x < 1 || rx_grid_z < 1) throw config_error("rx grid must be >= 1x1");
    if (max_reflections < 0) throw config_error("max_reflections must be >= 0");
    if (panel_size <= 0.0) throw config_error("panel_size must be positive");
    if (ris_max_hits < 0) throw config_error("ris_max_hits must be >= 0");
    for (int w : ris_walls)
        if (w < 0 || w > 5) throw config_error("ris wall id out of range");
    // All antennas must stay inside the room (coplanar with a wall is fine).
    for (const Vec3& p : antenna_positions())
        if (!room.contains(p)) throw config_error("rx array extends outside room");
    material_by_name(material_table, wall_material);
    material_by_name(material_table, floor_material);
    material_by_name(material_table, ceiling_material);
}

std::vector<Wall> build_walls(const SimulationConfig& config) {
    const Vec3& lo = config.room.min;
    const Vec3& hi = config.room.max;
    const MaterialSpec wall_m = material_by_name(config.material_table, config.wall_material);
    const MaterialSpec floor_m = material_by_name(config.material_table, config.floor_material);
    const MaterialSpec ceil_m = material_by_name(config.material_table, config.ceiling_material);

    std::vector<Wall> walls(6);
    // id, origin, u axis/extent, v axis/extent, inward normal
    auto set = [&](int id, Vec3 origin, Vec3 u, double lu, Vec3 v, double lv, Vec3 n,
                   const MaterialSpec& m) {
        Wall& w = walls[std::size_t(id)];
        w.id = id;
        w.origin = origin;
        w.u_axis = u;
        w.lu = lu;
        w.v_axis = v;
        w.lv = lv;
        w.normal = n;
        w.material = m;
    };
    const Vec3 ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
    set(0, {lo.x, lo.y, lo.z}, ey, hi.y - lo.y, ez, hi.z - lo.z, ex, wall_m);
    set(1, {hi.x, lo.y, lo.z}, ey, hi.y - lo.y, ez, hi.z - lo.z, -ex, wall_m);
    set(2, {lo.x, lo.y, lo.z}, ex, hi.x - lo.x, ez, hi.z - lo.z, ey, wall_m);
    set(3, {lo.x, hi.y, lo.z}, ex, hi.x - lo.x, ez, hi.z - lo.z, -ey, wall_m);
    set(4, {lo.x, lo.y, lo.z}, ex, hi.x - lo.x, ey, hi.y - lo.y, ez, floor_m);
    set(5, {lo.x, lo.y, hi.z}, ex, hi.x - lo.x, ey, hi.y - lo.y, -ez, ceil_m);

    for (int id : config.ris_walls) {
        Wall& w = walls[std::size_t(id)];
        w.ris = true;
        w.nu = int(std::floor(w.lu / config.panel_size));
        w.nv = int(std::floor(w.lv / config.panel_size));
        w.margin_u = 0.5 * (w.lu - w.nu * config.panel_size);
        w.margin_v = 0.5 * (w.lv - w.nv * config.panel_size);
    }
    return walls;
}

}  // namespace rfrecon
