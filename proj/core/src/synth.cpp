// SPDX-License-Identifier: Apache-2.0
//
// Copyright (c) 2026 The wisense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wisense/synth.hpp"

#include <cmath>
#include <complex>

#include "wisense/errors.hpp"
#include "wisense/rng.hpp"

namespace wisense::synth {

namespace {

constexpr double kSubcarrierSpacingHz = 312500.0;  // 802.11ac tone spacing
constexpr double kSpeedOfLight = 2.99792458e8;

struct Path {
    double delay_s = 0.0;
    double gain = 0.0;
    double init_phase = 0.0;
    double sin_aoa = 0.0;        // arrival angle factor for antenna offsets
    double doppler_hz = 0.0;     // environmental drift
    double mod_phase_off = 0.0;  // activity modulation phase offsets
    double mod_amp_off = 0.0;
    bool modulated = false;      // line of sight stays static
};

std::vector<Path> draw_paths(const EnvironmentSpec& env, int receiver) {
    Rng rng(Rng::derive(env.rng_seed, "paths", static_cast<std::uint64_t>(receiver)));
    std::vector<Path> paths(env.paths);
    const double decay_ns = std::max(1.0, env.delay_spread_ns / 2.0);
    double power = 0.0;
    for (int l = 0; l < env.paths; ++l) {
        Path& p = paths[l];
        if (l == 0) {
            p.delay_s = rng.uniform(5.0, 30.0) * 1e-9;
            p.gain = 1.0;
            p.modulated = false;
        } else {
            const double delay_ns = rng.uniform(10.0, std::max(20.0, env.delay_spread_ns));
            p.delay_s = delay_ns * 1e-9;
            p.gain = std::exp(-delay_ns / decay_ns) * rng.uniform(0.5, 1.0);
            p.modulated = true;
        }
        p.init_phase = rng.uniform(0.0, 2.0 * M_PI);
        p.sin_aoa = std::sin(rng.uniform(-M_PI / 2.0, M_PI / 2.0));
        p.doppler_hz = env.env_doppler_hz == 0.0
                           ? 0.0
                           : rng.uniform(-env.env_doppler_hz, env.env_doppler_hz);
        p.mod_phase_off = rng.uniform(0.0, 2.0 * M_PI);
        p.mod_amp_off = rng.uniform(0.0, 2.0 * M_PI);
        power += p.gain * p.gain;
    }
    // Unit mean subcarrier power, so snr_db is meaningful as-is.
    const double scale = 1.0 / std::sqrt(power);
    for (auto& p : paths) p.gain *= scale;
    return paths;
}

}  // namespace

std::vector<ActivityClass> builtin_activities() {
    return {
        {0, "empty", 0.0, 0.0, 0.0},
        {1, "standing", 0.3, 0.6, 0.10},
        {2, "walking", 1.5, 2.4, 0.35},
        {3, "jumping", 3.0, 3.6, 0.50},
    };
}

ActivityClass activity_by_name(const std::string& name) {
    for (const auto& a : builtin_activities())
        if (a.name == name) return a;
    throw ConfigError("unknown activity class: " + name);
}

EnvironmentSpec environment_from_config(const configfile::Config& cfg, const std::string& name,
                                        const EnvironmentSpec& defaults) {
    EnvironmentSpec env = defaults;
    env.name = name;
    const std::string section = "env " + name;
    env.receivers = static_cast<int>(cfg.get_int(section, "receivers", env.receivers));
    env.antennas = static_cast<int>(cfg.get_int(section, "antennas", env.antennas));
    env.bandwidth_mhz =
        static_cast<std::uint16_t>(cfg.get_int(section, "bandwidth_mhz", env.bandwidth_mhz));
    env.paths = static_cast<int>(cfg.get_int(section, "paths", env.paths));
    env.delay_spread_ns = cfg.get_double(section, "delay_spread_ns", env.delay_spread_ns);
    env.env_doppler_hz = cfg.get_double(section, "env_doppler_hz", env.env_doppler_hz);
    env.snr_db = cfg.get_double(section, "snr_db", env.snr_db);
    env.antenna_spacing_m = cfg.get_double(section, "antenna_spacing_m", env.antenna_spacing_m);
    env.carrier_ghz = cfg.get_double(section, "carrier_ghz", env.carrier_ghz);
    env.rng_seed = static_cast<std::uint64_t>(
        cfg.get_int(section, "seed", static_cast<long>(env.rng_seed)));
    return env;
}

std::vector<CsiStream> generate(const EnvironmentSpec& env, const ActivityClass& activity,
                                double duration_s, double rate_hz) {
    if (duration_s <= 0.0) throw ParameterError("generate: duration must be > 0");
    if (rate_hz <= 0.0) throw ParameterError("generate: rate must be > 0");
    if (env.receivers < 1 || env.antennas < 1)
        throw ParameterError("generate: need at least one receiver and antenna");
    if (env.paths < 1) throw ParameterError("generate: need at least one path per link");
    if (env.delay_spread_ns < 0.0) throw ParameterError("generate: negative delay spread");

    const std::uint16_t fft = raw_subcarrier_count(env.bandwidth_mhz);
    const std::size_t packets = static_cast<std::size_t>(std::ceil(duration_s * rate_hz));
    const double wavelength = kSpeedOfLight / (env.carrier_ghz * 1e9);
    const double noise_sigma =
        std::isinf(env.snr_db) ? 0.0 : std::sqrt(std::pow(10.0, -env.snr_db / 10.0) / 2.0);

    std::vector<CsiStream> streams;
    streams.reserve(static_cast<std::size_t>(env.receivers) * env.antennas);
    for (int r = 0; r < env.receivers; ++r) {
        const std::vector<Path> paths = draw_paths(env, r);
        for (int n = 0; n < env.antennas; ++n) {
            CsiStream stream;
            stream.receiver_id = static_cast<std::uint8_t>(r);
            stream.antenna_id = static_cast<std::uint8_t>(n);
            stream.bandwidth_mhz = env.bandwidth_mhz;
            stream.records.reserve(packets);

            Rng noise(Rng::derive(env.rng_seed, "noise",
                                  static_cast<std::uint64_t>(r) * 256 + n));
            const double antenna_shift = 2.0 * M_PI * (n * env.antenna_spacing_m) / wavelength;

            for (std::size_t p = 0; p < packets; ++p) {
                const double t = static_cast<double>(p) / rate_hz;
                CsiRecord rec;
                rec.receiver_id = stream.receiver_id;
                rec.antenna_id = stream.antenna_id;
                rec.stream_id = 0;
                rec.seq_num = static_cast<std::uint16_t>(p % kSeqModulus);
                rec.timestamp_us = static_cast<std::uint64_t>(std::llround(p * 1e6 / rate_hz));
                rec.capture_order = p * static_cast<std::uint64_t>(env.receivers) * env.antennas +
                                    static_cast<std::uint64_t>(r) * env.antennas + n;
                rec.csi.resize(fft);
                for (std::uint16_t s = 0; s < fft; ++s) {
                    const double f_s = (static_cast<double>(s) - fft / 2) * kSubcarrierSpacingHz;
                    std::complex<double> h(0.0, 0.0);
                    for (const Path& path : paths) {
                        double amp = path.gain;
                        double phase = path.init_phase + antenna_shift * path.sin_aoa -
                                       2.0 * M_PI * f_s * path.delay_s +
                                       2.0 * M_PI * path.doppler_hz * t;
                        if (path.modulated && activity.doppler_hz > 0.0) {
                            phase += activity.phase_depth *
                                     std::sin(2.0 * M_PI * activity.doppler_hz * t + path.mod_phase_off);
                            const double wobble =
                                1.0 + activity.amp_depth *
                                          std::sin(2.0 * M_PI * activity.doppler_hz * t + path.mod_amp_off);
                            amp *= std::max(0.05, wobble);
                        }
                        h += std::polar(amp, phase);
                    }
                    if (noise_sigma > 0.0)
                        h += std::complex<double>(noise_sigma * noise.normal(),
                                                  noise_sigma * noise.normal());
                    rec.csi[s] = {static_cast<float>(h.real()), static_cast<float>(h.imag())};
                }
                stream.records.push_back(std::move(rec));
            }
            streams.push_back(std::move(stream));
        }
    }
    return streams;
}

std::vector<CsiStream> inject_loss(const std::vector<CsiStream>& capture,
                                   double per_antenna_loss_prob, std::uint64_t seed) {
    if (per_antenna_loss_prob < 0.0 || per_antenna_loss_prob >= 1.0)
        throw ParameterError("inject_loss: probability must be in [0, 1)");
    std::vector<CsiStream> out;
    out.reserve(capture.size());
    for (std::size_t si = 0; si < capture.size(); ++si) {
        const CsiStream& src = capture[si];
        CsiStream dst;
        dst.receiver_id = src.receiver_id;
        dst.antenna_id = src.antenna_id;
        dst.bandwidth_mhz = src.bandwidth_mhz;
        dst.pruned_subcarriers = src.pruned_subcarriers;
        Rng rng(Rng::derive(seed, "loss", si));
        if (per_antenna_loss_prob == 0.0) {
            dst.records = src.records;
        } else {
            for (const auto& rec : src.records)
                if (!rng.bernoulli(per_antenna_loss_prob)) dst.records.push_back(rec);
        }
        out.push_back(std::move(dst));
    }
    return out;
}

}  // namespace wisense::synth
