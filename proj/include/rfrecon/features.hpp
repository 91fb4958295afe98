#pragma once
// Per-antenna RF signature extracted from traced multipath lists: polarization
// power/phase, power-weighted equivalent angle of arrival, RMS angular spreads,
// and delay statistics, concatenated across codebook configurations.

#include <string>
#include <vector>

#include "rfrecon/tracer.hpp"

namespace rfrecon {

inline constexpr int kFeaturesPerConfig = 10;

struct AntennaFeatures {
    double p_h = 0.0, p_v = 0.0;      // W
    double omega_h = 0.0, omega_v = 0.0;  // rad, (-pi, pi]
    double phi_t = 0.0;               // rad, (-pi, pi]
    double theta_t = 0.0;             // rad, [-pi/2, pi/2]
    double sigma_phi = 0.0, sigma_theta = 0.0;  // rad
    double tau_av = 0.0, sigma_tau = 0.0;       // s
    bool degenerate_power = false;    // no paths: powers/phases forced to 0
    bool degenerate_direction = false;  // vanishing resultant: angles forced to 0

    // Channel order: P_h, P_v, w_h, w_v, phi_t, theta_t, s_phi, s_theta, tau_av, s_tau
    std::array<double, kFeaturesPerConfig> as_array() const {
        return {p_h, p_v, omega_h, omega_v, phi_t, theta_t, sigma_phi, sigma_theta,
                tau_av, sigma_tau};
    }
};

// Total received field per polarization (dual-pol transmit: co- plus cross-pol
// contributions), then P = |X|^2 and omega = arg X.
void polarization_features(const AntennaPaths& paths, AntennaFeatures* out);

// Power-weighted equivalent AoA via the four-quadrant inverse tangent of the
// summed arrival vectors.
void equivalent_aoa(const AntennaPaths& paths, AntennaFeatures* out);

// Power-weighted RMS spread about (phi_t, theta_t); azimuth residuals wrapped
// to (-pi, pi].
void angular_spread(const AntennaPaths& paths, double phi_t, double theta_t,
                    AntennaFeatures* out);

// Power-weighted mean excess delay and RMS delay spread.
void delay_stats(const AntennaPaths& paths, AntennaFeatures* out);

AntennaFeatures compute_antenna_features(const AntennaPaths& paths);

struct FeatureMap {
    int n_antennas = 0;
    int n_configs = 0;
    int channels() const { return n_configs * kFeaturesPerConfig; }
    std::vector<double> data;  // row-major [antenna][channel]
    std::string provenance;

    double at(int antenna, int channel) const {
        return data[std::size_t(antenna) * channels() + channel];
    }
};

// Concatenates the per-configuration features channel-wise, configuration
// blocks in input order. Throws incomplete_input on ragged inputs.
FeatureMap assemble_feature_map(const std::vector<std::vector<AntennaPaths>>& per_config_paths,
                                std::string provenance = {});

}  // namespace rfrecon
