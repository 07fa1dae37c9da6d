/*
 * Copyright 2026 The buswarden Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "buswarden/fabric.hpp"
#include "buswarden/policy_lang.hpp"
#include "buswarden/response.hpp"

namespace buswarden {

/// Raised for unreadable files, schema violations and references that do not
/// resolve. The message carries enough location context to fix the file.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A fully resolved scenario: topology, compiled policy, traffic, trojans,
/// environment schedule and knobs, ready to drive a simulator.
struct ScenarioScript {
    std::string name;
    u64 cycles = 0;
    u64 seed = 0;
    u64 watchdog_horizon = 64;

    std::vector<MasterConfig> masters;
    std::vector<SlaveConfig> slaves;
    std::vector<Interposer> interposers;

    std::optional<PolicySpec> policy_source;       // set when compiled from text
    std::vector<CompiledSlavePolicy> compiled;     // per guarded slave

    bool spe_enabled = true;
    u32 spe_device_capacity = DeviceTable::kDefaultCapacity;
    u32 spe_policy_capacity = PolicyTable::kDefaultCapacity;

    bool sck_enabled = false;
    u32 sck_reload = 16;

    ResponsePolicy response_policy = ResponsePolicy::defaults();
    std::optional<Thresholds> thresholds;
    std::vector<EnvSample> env;
    std::vector<ScheduledWrite> config_writes;
};

constexpr int kScenarioVersion = 1;

/// Loads and validates a scenario file. Relative policy/image paths resolve
/// against the scenario file's directory.
ScenarioScript load_scenario(const std::string& path);

/// Same, from JSON text (for tests and embedded scenarios).
ScenarioScript parse_scenario(const std::string& json_text,
                              const std::string& name,
                              const std::string& base_dir);

Topology topology_of(const ScenarioScript& script);

}  // namespace buswarden
