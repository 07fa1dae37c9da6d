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
#include <vector>

#include "buswarden/bus.hpp"
#include "buswarden/response.hpp"

namespace buswarden {

// ---------------------------------------------------------------------------
// Policy storage
// ---------------------------------------------------------------------------

/// One fine-grained access rule for a single slave register. The register
/// offset is positional: an entry lives at policy_base + offset within the
/// policy table. The all-zero entry denies everything.
struct PolicyEntry {
    bool read_allowed = false;
    bool write_allowed = false;
    u8 required_prot = 0;  // 3-bit
    u8 prot_mask = 0;      // 3-bit; which prot bits are enforced (0 = none)
    u8 qos_max = 0;        // 4-bit ceiling

    constexpr bool operator==(const PolicyEntry&) const = default;
};

/// 32-bit image word: bit0 read, bit1 write, bits[4:2] required prot,
/// bits[7:5] prot mask, bits[11:8] qos ceiling, bits[31:12] reserved zero.
u32 pack_policy_entry(const PolicyEntry& e);
PolicyEntry unpack_policy_entry(u32 word);

/// 32-bit device-table word: bits[15:0] user id, bits[31:16] policy base.
u32 pack_device_word(u16 user_id, u16 policy_base);

/// Slot-addressed list of trusted masters, each bound to the base of its
/// policy span. Lookups of absent ids yield nothing, never a default base,
/// and the reserved unidentified id 0 is never trusted.
class DeviceTable {
public:
    static constexpr u32 kDefaultCapacity = 32;

    explicit DeviceTable(u32 capacity = kDefaultCapacity);

    u32 capacity() const { return static_cast<u32>(slots_.size()); }
    u32 occupied() const;

    /// Policy base for the master, or nullopt when untrusted.
    std::optional<u16> lookup(u16 user_id) const;

    /// Programs one slot from its packed word. A zero user id clears the
    /// slot. Fails when the slot index is out of range or the id is already
    /// bound elsewhere.
    bool write_slot(u32 slot, u32 word);

    std::optional<u32> read_slot(u32 slot) const;

private:
    struct Slot {
        u16 user_id = 0;
        u16 policy_base = 0;
    };
    std::vector<std::optional<Slot>> slots_;
};

/// Dense array of per-register rules, indexed by policy base + register
/// offset. Backed by plain words so the config port can program it directly.
class PolicyTable {
public:
    static constexpr u32 kDefaultCapacity = 2048;

    explicit PolicyTable(u32 capacity = kDefaultCapacity);

    u32 capacity() const { return static_cast<u32>(words_.size()); }

    /// Entry for base + offset, or nullopt when the offset lies outside the
    /// guarded slave's span or the index falls outside the table.
    std::optional<PolicyEntry> lookup(u16 base, u32 offset, u32 span) const;

    bool write_word(u32 index, u32 word);
    std::optional<u32> read_word(u32 index) const;

private:
    std::vector<u32> words_;
};

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

enum class Verdict : u8 { Grant, Deny };

enum class DenyReason : u8 {
    UntrustedMaster,
    PolicyMiss,
    PermissionDenied,
    AttributeViolation,
    QosViolation,
};

const char* to_string(DenyReason r);

struct Decision {
    Verdict verdict = Verdict::Deny;
    DenyReason reason = DenyReason::UntrustedMaster;  // Deny only

    static constexpr Decision grant() { return {Verdict::Grant, {}}; }
    static constexpr Decision deny(DenyReason r) { return {Verdict::Deny, r}; }

    constexpr bool granted() const { return verdict == Verdict::Grant; }
    constexpr bool operator==(const Decision& o) const {
        return verdict == o.verdict && (granted() || reason == o.reason);
    }
};

/// The flattened view of one access the decision logic sees.
struct AccessQuery {
    u16 user_id = 0;
    Direction direction = Direction::Read;
    u8 prot = 0;  // packed 3-bit
    u8 qos = 0;
    u32 reg_offset = 0;
};

/// Compares one transaction against one policy entry. Checks apply in a
/// fixed order, first failure wins: direction permission, then the masked
/// protection attributes, then the QoS ceiling.
Decision decide(const PolicyEntry& entry, const AccessQuery& query);

// ---------------------------------------------------------------------------
// The engine
// ---------------------------------------------------------------------------

/// Describes the slave a policy engine guards.
struct GuardConfig {
    u32 slave_id = 0;
    u32 base = 0;
    u32 regs = 0;  // register span in words
};

enum class GatePhase : u8 { Idle, Held, Granted, Blocked };

enum class GateActionKind : u8 {
    PassThrough,   // engine disabled; beat proceeds untouched
    HoldAndQuery,  // beat captured, lookups started
    ReleaseGrant,  // held beat replayed toward the slave
    ReleaseDeny,   // held beat discarded; slave never sees it
};

struct GateAction {
    GateActionKind kind = GateActionKind::PassThrough;
    ChannelBeat beat;        // the (held) beat the action applies to
    Decision decision;       // meaningful for the two release kinds
};

/// Per-slave security policy engine: configuration port, sniffer gate,
/// device table, policy table and decision logic.
///
/// The gate samples AW/AR beats, isolates the slave while the tables are
/// consulted (one cycle each for device lookup, policy lookup and decision)
/// and then either replays the beat slave-ward or discards it. While a beat
/// is held, the slave-facing VALID and the bus-facing READY are both down.
class PolicyEngine {
public:
    // Config-port word offsets.
    static constexpr u32 kControlOffset = 0x0;  // bit0 enable
    static constexpr u32 kStatusOffset = 0x1;   // read-only deny counter
    static constexpr u32 kDeviceBase = 0x100;
    static constexpr u32 kPolicyBase = 0x200;

    /// Cycles an address beat spends held while the tables are walked.
    static constexpr u32 kLookupCycles = 3;

    enum class ConfigResult : u8 { Ok, SlvErr };

    PolicyEngine(GuardConfig guard,
                 u32 device_capacity = DeviceTable::kDefaultCapacity,
                 u32 policy_capacity = PolicyTable::kDefaultCapacity);

    // -- configuration port (the trusted path) --

    ConfigResult configure(u32 offset, u32 word);
    std::optional<u32> read_register(u32 offset) const;

    bool enabled() const { return enabled_; }
    u32 deny_count() const { return deny_count_; }
    const GuardConfig& guard() const { return guard_; }

    // -- lookup pipeline --

    const DeviceTable& devices() const { return devices_; }
    const PolicyTable& policy() const { return policy_; }

    /// Register offset for an address presented to this gate, or nullopt
    /// when the address lies outside the guarded window.
    std::optional<u32> reg_offset_for(u32 addr) const;

    /// Full decision pipeline: device lookup, policy lookup, decision.
    Decision evaluate(const AccessQuery& query) const;
    Decision evaluate_beat(const ChannelBeat& addr_beat) const;

    // -- sniffer gate --

    GatePhase phase() const { return gate_phase_; }
    const std::optional<ChannelBeat>& held_beat() const { return held_beat_; }

    /// Advances the gate one cycle. `incoming` carries a new AW/AR beat
    /// presented by the bus this cycle, if any. Returns an action when the
    /// gate does something observable this cycle and nothing while it is
    /// counting lookup cycles.
    std::optional<GateAction> gate_step(const ChannelBeat* incoming, u64 cycle);

    /// Marks the released beat as consumed by the slave, returning the gate
    /// to Idle. Called by the fabric after a ReleaseGrant hand-off.
    void complete_release();

    /// Drops any held state, e.g. on a system reset.
    void reset_gate();

    /// Detection report for a deny decision at this gate.
    SecurityEvent report(const Decision& decision, const AccessQuery& query,
                         u64 cycle);

private:
    GuardConfig guard_;
    bool enabled_ = false;
    u32 deny_count_ = 0;
    DeviceTable devices_;
    PolicyTable policy_;

    GatePhase gate_phase_ = GatePhase::Idle;
    std::optional<ChannelBeat> held_beat_;
    Decision held_decision_;
    u32 hold_cycles_ = 0;
};

/// Event kind for a deny reason. Permission and trust failures both count as
/// intrusions; the finer-grained reasons keep their own kinds.
EventKind event_kind_for(DenyReason reason);

}  // namespace buswarden
