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

#include "buswarden/spe.hpp"

namespace buswarden {

u32 pack_policy_entry(const PolicyEntry& e) {
    u32 word = 0;
    if (e.read_allowed) word |= 1u << 0;
    if (e.write_allowed) word |= 1u << 1;
    word |= (static_cast<u32>(e.required_prot) & 0x7u) << 2;
    word |= (static_cast<u32>(e.prot_mask) & 0x7u) << 5;
    word |= (static_cast<u32>(e.qos_max) & 0xFu) << 8;
    return word;
}

PolicyEntry unpack_policy_entry(u32 word) {
    PolicyEntry e;
    e.read_allowed = (word & 1u) != 0;
    e.write_allowed = (word & 2u) != 0;
    e.required_prot = static_cast<u8>((word >> 2) & 0x7u);
    e.prot_mask = static_cast<u8>((word >> 5) & 0x7u);
    e.qos_max = static_cast<u8>((word >> 8) & 0xFu);
    return e;
}

u32 pack_device_word(u16 user_id, u16 policy_base) {
    return static_cast<u32>(user_id) | (static_cast<u32>(policy_base) << 16);
}

DeviceTable::DeviceTable(u32 capacity) : slots_(capacity) {}

u32 DeviceTable::occupied() const {
    u32 n = 0;
    for (const auto& s : slots_) {
        if (s) ++n;
    }
    return n;
}

std::optional<u16> DeviceTable::lookup(u16 user_id) const {
    if (user_id == kUnidentifiedUser) return std::nullopt;
    for (const auto& s : slots_) {
        if (s && s->user_id == user_id) return s->policy_base;
    }
    return std::nullopt;
}

bool DeviceTable::write_slot(u32 slot, u32 word) {
    if (slot >= slots_.size()) return false;
    u16 user_id = static_cast<u16>(word & 0xFFFFu);
    u16 base = static_cast<u16>(word >> 16);
    if (user_id == kUnidentifiedUser) {
        slots_[slot].reset();
        return true;
    }
    for (u32 i = 0; i < slots_.size(); ++i) {
        if (i != slot && slots_[i] && slots_[i]->user_id == user_id) {
            return false;  // would create a duplicate key
        }
    }
    slots_[slot] = Slot{user_id, base};
    return true;
}

std::optional<u32> DeviceTable::read_slot(u32 slot) const {
    if (slot >= slots_.size()) return std::nullopt;
    if (!slots_[slot]) return 0u;
    return pack_device_word(slots_[slot]->user_id, slots_[slot]->policy_base);
}

PolicyTable::PolicyTable(u32 capacity) : words_(capacity, 0u) {}

std::optional<PolicyEntry> PolicyTable::lookup(u16 base, u32 offset,
                                               u32 span) const {
    if (offset >= span) return std::nullopt;
    u64 index = static_cast<u64>(base) + offset;
    if (index >= words_.size()) return std::nullopt;
    return unpack_policy_entry(words_[index]);
}

bool PolicyTable::write_word(u32 index, u32 word) {
    if (index >= words_.size()) return false;
    words_[index] = word;
    return true;
}

std::optional<u32> PolicyTable::read_word(u32 index) const {
    if (index >= words_.size()) return std::nullopt;
    return words_[index];
}

const char* to_string(DenyReason r) {
    switch (r) {
        case DenyReason::UntrustedMaster: return "untrusted_master";
        case DenyReason::PolicyMiss: return "policy_miss";
        case DenyReason::PermissionDenied: return "permission_denied";
        case DenyReason::AttributeViolation: return "attribute_violation";
        case DenyReason::QosViolation: return "qos_violation";
    }
    return "?";
}

Decision decide(const PolicyEntry& entry, const AccessQuery& query) {
    bool permitted = query.direction == Direction::Read ? entry.read_allowed
                                                        : entry.write_allowed;
    if (!permitted) return Decision::deny(DenyReason::PermissionDenied);
    u8 masked_actual = query.prot & entry.prot_mask;
    u8 masked_required = entry.required_prot & entry.prot_mask;
    if (masked_actual != masked_required) {
        return Decision::deny(DenyReason::AttributeViolation);
    }
    if (query.qos > entry.qos_max) {
        return Decision::deny(DenyReason::QosViolation);
    }
    return Decision::grant();
}

EventKind event_kind_for(DenyReason reason) {
    switch (reason) {
        case DenyReason::UntrustedMaster:
        case DenyReason::PermissionDenied:
            return EventKind::Intrusion;
        case DenyReason::AttributeViolation:
            return EventKind::AttributeTamper;
        case DenyReason::PolicyMiss:
            return EventKind::PolicyMiss;
        case DenyReason::QosViolation:
            return EventKind::QosViolation;
    }
    return EventKind::Intrusion;
}

PolicyEngine::PolicyEngine(GuardConfig guard, u32 device_capacity,
                           u32 policy_capacity)
    : guard_(guard), devices_(device_capacity), policy_(policy_capacity) {}

PolicyEngine::ConfigResult PolicyEngine::configure(u32 offset, u32 word) {
    if (offset == kControlOffset) {
        enabled_ = (word & 1u) != 0;
        return ConfigResult::Ok;
    }
    if (offset == kStatusOffset) {
        return ConfigResult::SlvErr;  // read-only
    }
    if (offset >= kDeviceBase && offset < kDeviceBase + devices_.capacity()) {
        return devices_.write_slot(offset - kDeviceBase, word)
                   ? ConfigResult::Ok
                   : ConfigResult::SlvErr;
    }
    if (offset >= kPolicyBase && offset < kPolicyBase + policy_.capacity()) {
        return policy_.write_word(offset - kPolicyBase, word)
                   ? ConfigResult::Ok
                   : ConfigResult::SlvErr;
    }
    return ConfigResult::SlvErr;
}

std::optional<u32> PolicyEngine::read_register(u32 offset) const {
    if (offset == kControlOffset) return enabled_ ? 1u : 0u;
    if (offset == kStatusOffset) return deny_count_;
    if (offset >= kDeviceBase && offset < kDeviceBase + devices_.capacity()) {
        return devices_.read_slot(offset - kDeviceBase);
    }
    if (offset >= kPolicyBase && offset < kPolicyBase + policy_.capacity()) {
        return policy_.read_word(offset - kPolicyBase);
    }
    return std::nullopt;
}

std::optional<u32> PolicyEngine::reg_offset_for(u32 addr) const {
    u64 limit = static_cast<u64>(guard_.base) + static_cast<u64>(guard_.regs) * 4 - 1;
    if (addr < guard_.base || addr > limit) return std::nullopt;
    return (addr - guard_.base) / 4;
}

Decision PolicyEngine::evaluate(const AccessQuery& query) const {
    auto base = devices_.lookup(query.user_id);
    if (!base) return Decision::deny(DenyReason::UntrustedMaster);
    auto entry = policy_.lookup(*base, query.reg_offset, guard_.regs);
    if (!entry) return Decision::deny(DenyReason::PolicyMiss);
    return decide(*entry, query);
}

Decision PolicyEngine::evaluate_beat(const ChannelBeat& addr_beat) const {
    const AddrSignals& sig = addr_beat.addr();
    AccessQuery q;
    q.user_id = sig.user;
    q.direction =
        addr_beat.channel == Channel::AR ? Direction::Read : Direction::Write;
    q.prot = sig.prot.pack();
    q.qos = sig.qos;
    auto off = reg_offset_for(sig.addr);
    if (!off) {
        // Outside the guarded window (a redirected beat): let the policy
        // lookup miss by pushing the offset past any valid span.
        q.reg_offset = guard_.regs;
    } else {
        q.reg_offset = *off;
    }
    return evaluate(q);
}

std::optional<GateAction> PolicyEngine::gate_step(const ChannelBeat* incoming,
                                                  u64 cycle) {
    (void)cycle;
    // A disabled engine passes new beats through untouched but still drains
    // anything it was already holding when it was switched off.
    if (!enabled_ && gate_phase_ == GatePhase::Idle) {
        if (incoming == nullptr) return std::nullopt;
        GateAction act;
        act.kind = GateActionKind::PassThrough;
        act.beat = *incoming;
        return act;
    }

    switch (gate_phase_) {
        case GatePhase::Idle: {
            if (incoming == nullptr || !incoming->valid ||
                !incoming->is_address()) {
                return std::nullopt;
            }
            gate_phase_ = GatePhase::Held;
            held_beat_ = *incoming;
            held_decision_ = evaluate_beat(*incoming);
            hold_cycles_ = 1;
            GateAction act;
            act.kind = GateActionKind::HoldAndQuery;
            act.beat = *incoming;
            return act;
        }
        case GatePhase::Held: {
            if (hold_cycles_ < kLookupCycles) {
                ++hold_cycles_;
                return std::nullopt;
            }
            GateAction act;
            act.beat = *held_beat_;
            act.decision = held_decision_;
            if (held_decision_.granted()) {
                gate_phase_ = GatePhase::Granted;
                act.kind = GateActionKind::ReleaseGrant;
            } else {
                gate_phase_ = GatePhase::Blocked;
                ++deny_count_;
                act.kind = GateActionKind::ReleaseDeny;
                held_beat_.reset();
            }
            return act;
        }
        case GatePhase::Granted:
        case GatePhase::Blocked:
            // Waiting for the fabric to finish the hand-off.
            return std::nullopt;
    }
    return std::nullopt;
}

void PolicyEngine::complete_release() {
    gate_phase_ = GatePhase::Idle;
    held_beat_.reset();
    hold_cycles_ = 0;
}

void PolicyEngine::reset_gate() {
    gate_phase_ = GatePhase::Idle;
    held_beat_.reset();
    hold_cycles_ = 0;
}

SecurityEvent PolicyEngine::report(const Decision& decision,
                                   const AccessQuery& query, u64 cycle) {
    SecurityEvent ev;
    ev.kind = event_kind_for(decision.reason);
    ev.source = EventSource::SPE;
    ev.slave_id = guard_.slave_id;
    ev.master = MasterTag{query.user_id, std::nullopt};
    ev.cycle = cycle;
    return ev;
}

}  // namespace buswarden
