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

#include "buswarden/bus.hpp"
#include "buswarden/response.hpp"

namespace buswarden {

/// Watchdog on a host-side link that detects response-status tampering.
///
/// The checker ORs the SLVERR/DECERR condition of the B and R channels and
/// runs a three-state machine around a 32-bit countdown timer:
///
///   NORMAL    --error-->   DETECTION  (timer loads the reload value)
///   DETECTION --error-->   timer decrements; on reaching 0, ATTACK + report
///   DETECTION --no error-> NORMAL     (transient errors are tolerated)
///   ATTACK                absorbing until cleared through the config port
///
/// A sustained error therefore trips the checker after exactly reload + 1
/// consecutive error cycles, and exactly one event is reported per latch.
class SanityChecker {
public:
    enum class Phase : u8 { Normal, Detection, Attack };

    // Config-port word offsets.
    static constexpr u32 kControlOffset = 0x0;  // bit0 enable
    static constexpr u32 kReloadOffset = 0x1;   // full 32-bit timeout
    static constexpr u32 kStatusOffset = 0x2;   // read-only

    enum class ConfigResult : u8 { Ok, SlvErr };

    explicit SanityChecker(MasterTag host = {}) : host_(host) {}

    /// Writes CONTROL. Clearing the enable bit resets the FSM to NORMAL and
    /// clears the attack latch; that is the only way out of ATTACK.
    ConfigResult write_control(u32 word);

    /// Writes the timeout. A reload of 0 is rejected because it would latch
    /// on any single error cycle rather than a sustained interval.
    ConfigResult write_reload(u32 word);

    ConfigResult configure(u32 offset, u32 word);
    std::optional<u32> read_register(u32 offset) const;

    /// Advances one cycle with the current error-signal level. Returns the
    /// BusTamper event on the cycle ATTACK is entered, and nothing otherwise.
    /// Disabled checkers never change state and never report.
    std::optional<SecurityEvent> step(bool resp_error_asserted, u64 cycle);

    Phase phase() const { return phase_; }
    bool enabled() const { return enabled_; }
    u32 timer() const { return timer_; }
    u32 reload() const { return reload_; }
    bool attack_latched() const { return attack_latched_; }
    std::optional<u64> reported_cycle() const { return reported_cycle_; }

    /// STATUS word: bit0 attack latch, bits[31:8] low bits of the report
    /// cycle.
    u32 status_word() const;

private:
    MasterTag host_;
    Phase phase_ = Phase::Normal;
    bool enabled_ = false;
    u32 reload_ = kDefaultReload;
    u32 timer_ = kDefaultReload;
    bool attack_latched_ = false;
    std::optional<u64> reported_cycle_;

    static constexpr u32 kDefaultReload = 16;
};

}  // namespace buswarden
