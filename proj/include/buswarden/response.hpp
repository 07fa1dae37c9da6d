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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "buswarden/bus.hpp"

namespace buswarden {

// ---------------------------------------------------------------------------
// Security events
// ---------------------------------------------------------------------------

enum class EventKind : u8 {
    Intrusion,        // untrusted master or disallowed direction at a gate
    AttributeTamper,  // protection attributes did not match the policy
    PolicyMiss,       // no policy entry covers the accessed register
    QosViolation,     // transaction QoS above the policy ceiling
    BusTamper,        // sustained response-status errors on a host link
    EnvTamper,        // physical parameter outside its threshold window
};

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& name);

enum class EventSource : u8 { SPE, SCK, ATE };

const char* to_string(EventSource s);

/// One detection report, as consumed by the response engine.
/// BusTamper events originate only from the sanity checker and EnvTamper
/// events only from the anti-tamper monitor.
struct SecurityEvent {
    EventKind kind = EventKind::Intrusion;
    EventSource source = EventSource::SPE;
    u32 slave_id = 0;  // meaningful for source == SPE
    std::optional<MasterTag> master;
    u64 cycle = 0;
};

// ---------------------------------------------------------------------------
// Countermeasures and security posture
// ---------------------------------------------------------------------------

enum class Countermeasure : u8 {
    EraseKeys,
    DisableCrypto,
    DisableReadback,
    Lockdown,
    SystemReset,
};

const char* to_string(Countermeasure c);
std::optional<Countermeasure> countermeasure_from_string(const std::string& name);

/// Mutable device security posture acted on by countermeasures. Key erasure,
/// crypto disable and readback disable behave like fuses: a system reset does
/// not restore them, and crypto can never be re-enabled within a run.
struct SystemSecurityState {
    bool keys_present = true;
    bool crypto_enabled = true;
    bool readback_enabled = true;
    bool locked_down = false;
    u32 reset_count = 0;

    bool operator==(const SystemSecurityState&) const = default;
};

/// Applies one countermeasure to the posture. Pure; the simulator performs
/// the bus-level side effects (flush on reset, DECERR under lockdown).
SystemSecurityState apply_countermeasure(SystemSecurityState state,
                                         Countermeasure cm);

// ---------------------------------------------------------------------------
// Response policy
// ---------------------------------------------------------------------------

/// Ordered countermeasure lists per event kind. Every kind must be covered
/// (possibly by an empty list); coverage is validated when the policy is
/// loaded, never at event time.
class ResponsePolicy {
public:
    /// Severity-graded default covering all six kinds.
    static ResponsePolicy defaults();

    /// Builds a policy from an explicit kind -> actions map. Throws
    /// BuildError if any kind is uncovered.
    static ResponsePolicy from_map(
        const std::map<EventKind, std::vector<Countermeasure>>& mapping);

    const std::vector<Countermeasure>& actions_for(EventKind kind) const;

private:
    ResponsePolicy() = default;
    std::map<EventKind, std::vector<Countermeasure>> mapping_;
};

/// Countermeasures for one event, in execution order.
inline const std::vector<Countermeasure>& sre_handle(
    const SecurityEvent& event, const ResponsePolicy& policy) {
    return policy.actions_for(event.kind);
}

// ---------------------------------------------------------------------------
// Anti-tamper monitoring
// ---------------------------------------------------------------------------

/// One physical parameter reading. Units are millivolts, milli-degrees C and
/// milliwatts so thresholds stay integral.
struct EnvSample {
    i64 voltage_mv = 0;
    i64 temp_mc = 0;
    i64 power_mw = 0;
    u64 cycle = 0;
};

struct Thresholds {
    i64 voltage_min_mv = 0, voltage_max_mv = 0;
    i64 temp_min_mc = 0, temp_max_mc = 0;
    i64 power_min_mw = 0, power_max_mw = 0;

    /// Throws BuildError unless min <= max for every parameter.
    void validate() const;
};

/// EnvTamper event iff any parameter lies strictly outside its [min, max]
/// window. Boundary values are in range.
std::optional<SecurityEvent> ate_step(const EnvSample& sample,
                                      const Thresholds& thresholds);

}  // namespace buswarden
