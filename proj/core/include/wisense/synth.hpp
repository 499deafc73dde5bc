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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wisense/configfile.hpp"
#include "wisense/types.hpp"

namespace wisense::synth {

/// Multipath propagation profile for one measurement site. Each receiver
/// draws an independent path set (macro-diversity); antennas of one
/// receiver share paths up to geometric phase offsets (micro-diversity).
struct EnvironmentSpec {
    std::string name = "env";
    int receivers = 3;
    int antennas = 4;
    std::uint16_t bandwidth_mhz = 20;
    int paths = 5;                   // per receiver link, >= 1 (path 0 is the static line of sight)
    double delay_spread_ns = 120.0;  // scattered-path delays drawn up to this
    double env_doppler_hz = 0.02;    // residual environmental drift per path
    double snr_db = 20.0;            // complex AWGN; +inf disables noise
    double antenna_spacing_m = 0.03;
    double carrier_ghz = 5.18;
    std::uint64_t rng_seed = 1;
};

/// Doppler and amplitude modulation law standing in for a sensed activity.
struct ActivityClass {
    int class_id = 0;
    std::string name = "empty";
    double doppler_hz = 0.0;   // modulation rate of the scattered paths
    double phase_depth = 0.0;  // radians of path-phase swing
    double amp_depth = 0.0;    // relative amplitude swing
};

/// The four shipped classes: empty (static), standing (~0.3 Hz
/// micro-motion), walking (~1.5 Hz), jumping (~3 Hz).
std::vector<ActivityClass> builtin_activities();

ActivityClass activity_by_name(const std::string& name);

/// Reads "[env NAME]" overrides applied on top of the given defaults.
EnvironmentSpec environment_from_config(const configfile::Config& cfg, const std::string& name,
                                        const EnvironmentSpec& defaults);

/// Synthesizes one capture: receivers x antennas streams of ceil(duration *
/// rate) records each, in interleaved capture order with shared sequence
/// numbers and timestamps. Deterministic for a fixed spec.
std::vector<CsiStream> generate(const EnvironmentSpec& env, const ActivityClass& activity,
                                double duration_s, double rate_hz);

/// Drops records independently per antenna stream with the given
/// probability (exercises micro-alignment). Probability must be in [0, 1).
std::vector<CsiStream> inject_loss(const std::vector<CsiStream>& capture,
                                   double per_antenna_loss_prob, std::uint64_t seed);

}  // namespace wisense::synth
