#include "rfrecon/features.hpp"

#include <cmath>

#include "rfrecon/errors.hpp"

namespace rfrecon {

namespace {

// Received field components under dual-pol transmit: E_p = h_pp + h_pq.
inline cplx field_h(const PathComponent& p) { return p.jones.hh + p.jones.hv; }
inline cplx field_v(const PathComponent& p) { return p.jones.vv + p.jones.vh; }

inline double path_power(const PathComponent& p) {
    return std::norm(field_h(p)) + std::norm(field_v(p));
}

// Wraps an angle difference to (-pi, pi].
inline double wrap_pi(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}

}  // namespace

void polarization_features(const AntennaPaths& paths, AntennaFeatures* out) {
    if (paths.empty()) {
        out->p_h = out->p_v = out->omega_h = out->omega_v = 0.0;
        out->degenerate_power = true;
        return;
    }
    cplx xh{0.0, 0.0}, xv{0.0, 0.0};
    for (const PathComponent& p : paths) {
        xh += field_h(p);
        xv += field_v(p);
    }
    out->p_h = std::norm(xh);
    out->p_v = std::norm(xv);
    out->omega_h = std::arg(xh);
    out->omega_v = std::arg(xv);
}

void equivalent_aoa(const AntennaPaths& paths, AntennaFeatures* out) {
    Vec3 sum{0, 0, 0};
    for (const PathComponent& p : paths) {
        double i = path_power(p);
        double ce = std::cos(p.elevation);
        sum += i * Vec3{ce * std::cos(p.azimuth), ce * std::sin(p.azimuth),
                        std::sin(p.elevation)};
    }
    double n = norm(sum);
    if (n < 1e-15) {
        out->phi_t = out->theta_t = 0.0;
        out->degenerate_direction = true;
        return;
    }
    out->phi_t = std::atan2(sum.y, sum.x);
    out->theta_t = std::asin(std::clamp(sum.z / n, -1.0, 1.0));
}

void angular_spread(const AntennaPaths& paths, double phi_t, double theta_t,
                    AntennaFeatures* out) {
    double num_phi = 0.0, num_theta = 0.0, den = 0.0;
    for (const PathComponent& p : paths) {
        double i = path_power(p);
        double dphi = wrap_pi(p.azimuth - phi_t);
        double dtheta = p.elevation - theta_t;
        num_phi += i * dphi * dphi;
        num_theta += i * dtheta * dtheta;
        den += i;
    }
    if (den <= 0.0) {
        out->sigma_phi = out->sigma_theta = 0.0;
        return;
    }
    out->sigma_phi = std::sqrt(num_phi / den);
    out->sigma_theta = std::sqrt(num_theta / den);
}

void delay_stats(const AntennaPaths& paths, AntennaFeatures* out) {
    double sum_i = 0.0, sum_it = 0.0, sum_it2 = 0.0;
    for (const PathComponent& p : paths) {
        double i = path_power(p);
        sum_i += i;
        sum_it += i * p.delay;
        sum_it2 += i * p.delay * p.delay;
    }
    if (sum_i <= 0.0) {
        out->tau_av = out->sigma_tau = 0.0;
        return;
    }
    out->tau_av = sum_it / sum_i;
    double var = sum_it2 / sum_i - out->tau_av * out->tau_av;
    out->sigma_tau = std::sqrt(std::max(0.0, var));
}

AntennaFeatures compute_antenna_features(const AntennaPaths& paths) {
    AntennaFeatures f;
    polarization_features(paths, &f);
    if (paths.empty()) {
        f.degenerate_direction = true;
        return f;  // all-zero features, flagged
    }
    equivalent_aoa(paths, &f);
    angular_spread(paths, f.phi_t, f.theta_t, &f);
    delay_stats(paths, &f);
    return f;
}

FeatureMap assemble_feature_map(const std::vector<std::vector<AntennaPaths>>& per_config_paths,
                                std::string provenance) {
    if (per_config_paths.empty()) throw incomplete_input("no configurations traced");
    const std::size_t n_antennas = per_config_paths.front().size();
    for (const auto& cfg : per_config_paths)
        if (cfg.size() != n_antennas)
            throw incomplete_input("configuration traces disagree on antenna count");

    FeatureMap map;
    map.n_antennas = int(n_antennas);
    map.n_configs = int(per_config_paths.size());
    map.provenance = std::move(provenance);
    map.data.resize(n_antennas * std::size_t(map.channels()));

    for (std::size_t n = 0; n < n_antennas; ++n) {
        double* row = &map.data[n * std::size_t(map.channels())];
        for (std::size_t c = 0; c < per_config_paths.size(); ++c) {
            auto vals = compute_antenna_features(per_config_paths[c][n]).as_array();
            for (int k = 0; k < kFeaturesPerConfig; ++k)
                row[c * kFeaturesPerConfig + std::size_t(k)] = vals[std::size_t(k)];
        }
    }
    return map;
}

}  // namespace rfrecon
