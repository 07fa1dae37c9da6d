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

#include "buswarden/response.hpp"

namespace buswarden {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Intrusion: return "intrusion";
        case EventKind::AttributeTamper: return "attribute_tamper";
        case EventKind::PolicyMiss: return "policy_miss";
        case EventKind::QosViolation: return "qos_violation";
        case EventKind::BusTamper: return "bus_tamper";
        case EventKind::EnvTamper: return "env_tamper";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(const std::string& name) {
    if (name == "intrusion") return EventKind::Intrusion;
    if (name == "attribute_tamper") return EventKind::AttributeTamper;
    if (name == "policy_miss") return EventKind::PolicyMiss;
    if (name == "qos_violation") return EventKind::QosViolation;
    if (name == "bus_tamper") return EventKind::BusTamper;
    if (name == "env_tamper") return EventKind::EnvTamper;
    return std::nullopt;
}

const char* to_string(EventSource s) {
    switch (s) {
        case EventSource::SPE: return "spe";
        case EventSource::SCK: return "sck";
        case EventSource::ATE: return "ate";
    }
    return "?";
}

const char* to_string(Countermeasure c) {
    switch (c) {
        case Countermeasure::EraseKeys: return "erase_keys";
        case Countermeasure::DisableCrypto: return "disable_crypto";
        case Countermeasure::DisableReadback: return "disable_readback";
        case Countermeasure::Lockdown: return "lockdown";
        case Countermeasure::SystemReset: return "system_reset";
    }
    return "?";
}

std::optional<Countermeasure> countermeasure_from_string(
    const std::string& name) {
    if (name == "erase_keys") return Countermeasure::EraseKeys;
    if (name == "disable_crypto") return Countermeasure::DisableCrypto;
    if (name == "disable_readback") return Countermeasure::DisableReadback;
    if (name == "lockdown") return Countermeasure::Lockdown;
    if (name == "system_reset") return Countermeasure::SystemReset;
    return std::nullopt;
}

SystemSecurityState apply_countermeasure(SystemSecurityState state,
                                         Countermeasure cm) {
    switch (cm) {
        case Countermeasure::EraseKeys:
            state.keys_present = false;
            break;
        case Countermeasure::DisableCrypto:
            state.crypto_enabled = false;
            break;
        case Countermeasure::DisableReadback:
            state.readback_enabled = false;
            break;
        case Countermeasure::Lockdown:
            state.locked_down = true;
            break;
        case Countermeasure::SystemReset:
            // Fuse-like fields persist across the reset.
            state.reset_count += 1;
            break;
    }
    return state;
}

ResponsePolicy ResponsePolicy::defaults() {
    ResponsePolicy p;
    p.mapping_[EventKind::Intrusion] = {Countermeasure::Lockdown};
    p.mapping_[EventKind::PolicyMiss] = {Countermeasure::Lockdown};
    p.mapping_[EventKind::QosViolation] = {Countermeasure::Lockdown};
    p.mapping_[EventKind::AttributeTamper] = {Countermeasure::EraseKeys,
                                              Countermeasure::Lockdown};
    p.mapping_[EventKind::BusTamper] = {Countermeasure::EraseKeys,
                                        Countermeasure::DisableReadback,
                                        Countermeasure::Lockdown};
    p.mapping_[EventKind::EnvTamper] = {Countermeasure::EraseKeys,
                                        Countermeasure::DisableCrypto,
                                        Countermeasure::Lockdown};
    return p;
}

ResponsePolicy ResponsePolicy::from_map(
    const std::map<EventKind, std::vector<Countermeasure>>& mapping) {
    static constexpr EventKind kAll[] = {
        EventKind::Intrusion,     EventKind::AttributeTamper,
        EventKind::PolicyMiss,    EventKind::QosViolation,
        EventKind::BusTamper,     EventKind::EnvTamper,
    };
    for (EventKind k : kAll) {
        if (mapping.find(k) == mapping.end()) {
            throw BuildError(std::string("response policy does not cover event kind '") +
                             to_string(k) + "'");
        }
    }
    ResponsePolicy p;
    p.mapping_ = mapping;
    return p;
}

const std::vector<Countermeasure>& ResponsePolicy::actions_for(
    EventKind kind) const {
    return mapping_.at(kind);
}

void Thresholds::validate() const {
    if (voltage_min_mv > voltage_max_mv || temp_min_mc > temp_max_mc ||
        power_min_mw > power_max_mw) {
        throw BuildError("thresholds must satisfy min <= max per parameter");
    }
}

std::optional<SecurityEvent> ate_step(const EnvSample& sample,
                                      const Thresholds& thresholds) {
    bool violated = sample.voltage_mv < thresholds.voltage_min_mv ||
                    sample.voltage_mv > thresholds.voltage_max_mv ||
                    sample.temp_mc < thresholds.temp_min_mc ||
                    sample.temp_mc > thresholds.temp_max_mc ||
                    sample.power_mw < thresholds.power_min_mw ||
                    sample.power_mw > thresholds.power_max_mw;
    if (!violated) return std::nullopt;
    SecurityEvent ev;
    ev.kind = EventKind::EnvTamper;
    ev.source = EventSource::ATE;
    ev.cycle = sample.cycle;
    return ev;
}

}  // namespace buswarden
