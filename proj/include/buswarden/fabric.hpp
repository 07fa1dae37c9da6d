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

#include "buswarden/bus.hpp"
#include "buswarden/response.hpp"
#include "buswarden/sck.hpp"
#include "buswarden/spe.hpp"
#include "buswarden/trojan.hpp"

namespace buswarden {

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

/// One scripted single-beat access.
struct TrafficItem {
    u64 issue_cycle = 0;
    Direction direction = Direction::Read;
    u32 address = 0;
    ProtAttr prot;
    u8 qos = 0;
    u32 data = 0;  // writes
};

struct MasterConfig {
    std::string name;
    MasterTag tag;
    std::vector<TrafficItem> script;
};

struct SlaveConfig {
    std::string name;
    u32 id = 0;
    u32 base = 0;
    u32 regs = 0;     // register file size in words
    u32 latency = 1;  // response latency in cycles, at least 1
    bool guarded = false;
};

/// Names one bus link: a master <-> interconnect link by master index, or an
/// interconnect <-> slave link by slave id.
struct LinkRef {
    enum class Type : u8 { Master, Slave };
    Type type = Type::Master;
    u32 id = 0;
};

struct Interposer {
    LinkRef position;
    TrojanModel model;
};

struct Topology {
    std::vector<MasterConfig> masters;
    std::vector<SlaveConfig> slaves;
    std::vector<Interposer> interposers;
    u64 watchdog_horizon = 64;
    u32 spe_device_capacity = DeviceTable::kDefaultCapacity;
    u32 spe_policy_capacity = PolicyTable::kDefaultCapacity;
};

// ---------------------------------------------------------------------------
// Per-cycle reporting
// ---------------------------------------------------------------------------

/// Observation point of a channel transfer: the master's port or the slave's
/// port. Beats consumed inside the fabric (held, denied, decode-missed)
/// appear at neither.
enum class Port : u8 { Master, Slave };

struct TransferRecord {
    u64 cycle = 0;
    Port port = Port::Master;
    Channel channel = Channel::AW;
    u16 user = 0;
    std::optional<u32> slave_id;
    std::optional<u32> addr;
    std::optional<u8> prot;
    std::optional<u8> qos;
    std::optional<RespStatus> resp;
};

struct CompletedTxn {
    u32 master_index = 0;
    u16 user = 0;
    Direction direction = Direction::Read;
    u32 address = 0;
    u8 prot = 0;
    u8 qos = 0;
    u64 scripted_cycle = 0;
    u64 issue_cycle = 0;  // first cycle the address beat was driven
    u64 complete_cycle = 0;
    RespStatus status = RespStatus::Okay;
};

struct StallRecord {
    u32 master_index = 0;
    u16 user = 0;
    u64 cycle = 0;
    u32 address = 0;
    Channel channel = Channel::AR;
};

struct AppliedCountermeasure {
    u64 cycle = 0;
    Countermeasure action = Countermeasure::Lockdown;
    EventKind trigger = EventKind::Intrusion;
};

struct TickReport {
    u64 cycle = 0;
    std::vector<TransferRecord> transfers;
    std::vector<CompletedTxn> completed;
    std::vector<SecurityEvent> events;
    std::vector<StallRecord> stalls;
    std::vector<AppliedCountermeasure> countermeasures;
};

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

struct ConfigTarget {
    enum class Kind : u8 { Spe, Sck };
    Kind kind = Kind::Spe;
    u32 id = 0;  // slave id or master index
};

struct ScheduledWrite {
    u64 cycle = 0;
    ConfigTarget target;
    u32 offset = 0;
    u32 word = 0;
};

/// Deterministic cycle-stepped model of masters, interconnect, slaves and
/// interposers exchanging channel beats.
///
/// Timing model: synchronous, one beat per channel per link per cycle.
/// Requests spend one cycle crossing the interconnect each way, a slave
/// answers `latency` cycles after accepting an access, unmapped addresses
/// are answered DECERR one cycle after the address beat, and an enabled
/// policy engine adds exactly its three lookup cycles to a granted access.
/// Masters keep a single transaction in flight; scripted accesses whose
/// cycle arrives while the master is busy issue as soon as it frees.
class Simulator {
public:
    /// Validates and builds. Throws BuildError on overlapping address
    /// ranges, duplicate master ids, dangling interposer positions, zero
    /// slave latency or malformed scripts.
    explicit Simulator(Topology topology);

    /// Advances exactly one cycle.
    TickReport step();

    u64 cycle() const { return cycle_; }

    // -- trusted configuration path --

    PolicyEngine::ConfigResult spe_configure(u32 slave_id, u32 offset, u32 word);
    std::optional<u32> spe_read(u32 slave_id, u32 offset) const;
    SanityChecker::ConfigResult sck_configure(u32 master_index, u32 offset,
                                              u32 word);
    std::optional<u32> sck_read(u32 master_index, u32 offset) const;

    /// Queues a config-port write to apply at the given cycle boundary.
    void schedule_config_write(const ScheduledWrite& write);

    void set_response_policy(ResponsePolicy policy);
    void set_thresholds(std::optional<Thresholds> thresholds);
    void set_env_schedule(std::vector<EnvSample> samples);

    const SystemSecurityState& security_state() const { return security_; }

    // -- end-of-run accounting --

    struct Leftover {
        u32 master_index = 0;
        u16 user = 0;
        Direction direction = Direction::Read;
        u32 address = 0;
        u64 scripted_cycle = 0;
        std::optional<u64> first_drive_cycle;
        bool stalled = false;  // watchdog fired for it
        bool flushed = false;  // dropped by a system reset
    };

    /// Transactions still in flight or never issued, in master order.
    std::vector<Leftover> unfinished() const;
    const std::vector<Leftover>& flushed() const { return flushed_; }

    u64 scripted_count() const;
    u64 completed_count() const { return completed_count_; }

    const AddressMap& address_map() const { return map_; }
    const Topology& topology() const { return topo_; }

private:
    struct StagedBeat {
        ChannelBeat beat;
        u32 owner = 0;   // master index
        u64 serial = 0;  // transaction serial
        u64 arrival = 0; // first cycle the receiver may consume it
        std::optional<u32> from_slave;
    };

    struct Outstanding {
        TrafficItem item;
        u64 serial = 0;
        u64 scripted_cycle = 0;
        u64 first_drive_cycle = 0;
        std::optional<u32> routed_slave;
        enum class Phase : u8 { DriveAddr, DriveData, WaitResp } phase =
            Phase::DriveAddr;
        bool stall_reported = false;
    };

    struct MasterLink {
        MasterConfig cfg;
        size_t next_script = 0;
        std::optional<Outstanding> outstanding;
        SanityChecker sck;
        std::vector<TrojanModel> trojans;
        std::vector<StagedBeat> resp_queue;  // responses in flight, FIFO
    };

    struct SlaveLink {
        SlaveConfig cfg;
        std::optional<PolicyEngine> spe;
        std::vector<TrojanModel> trojans;

        std::optional<StagedBeat> addr_stage;
        std::optional<StagedBeat> wdata_stage;
        u32 gate_owner = 0;
        u64 gate_serial = 0;

        // Write data captured by the gate while its address beat is held.
        std::optional<StagedBeat> gate_wdata;
        // Granted address beat waiting to be handed to the slave.
        std::optional<StagedBeat> pending_grant;
        // W beats of denied or locked-down writes are consumed silently.
        std::optional<u64> discard_wdata_serial;

        // Slave model: flat word register file, zero initialized.
        std::vector<u32> file;
        bool busy = false;
        u32 countdown = 0;
        bool have_aw = false;  // write address accepted, waiting for data
        u32 cur_owner = 0;
        u64 cur_serial = 0;
        u16 cur_user = 0;
        Direction cur_dir = Direction::Read;
        bool cur_reg_valid = false;
        u32 cur_reg = 0;
    };

    // step phases
    void phase_boundary(TickReport& report);
    void phase_env(TickReport& report);
    void phase_deliver(TickReport& report);
    void phase_slave_links(TickReport& report);
    void phase_route(TickReport& report);
    void phase_watchdog(TickReport& report);

    void deliver_one(u32 mi, TickReport& report);
    void slave_drive(SlaveLink& link, TickReport& report);
    void slave_accept_addr(SlaveLink& link, const StagedBeat& staged,
                           TickReport& report);
    void slave_accept_wdata(SlaveLink& link, const StagedBeat& staged,
                            TickReport& report);
    void schedule_response(u32 owner, u64 serial, Channel channel,
                           RespStatus status, u32 data, u16 user,
                           std::optional<u32> from_slave = std::nullopt);
    void gate_deny(SlaveLink& link, const StagedBeat& staged,
                   const Decision& decision, TickReport& report);
    void flush_pending();

    TransferRecord record_for(u64 cycle, Port port, const ChannelBeat& beat,
                              u16 user, std::optional<u32> slave_id) const;

    Topology topo_;
    AddressMap map_;
    std::vector<MasterLink> masters_;
    std::vector<SlaveLink> slaves_;
    u64 cycle_ = 0;
    u64 next_serial_ = 1;

    SystemSecurityState security_;
    ResponsePolicy response_policy_ = ResponsePolicy::defaults();
    std::optional<Thresholds> thresholds_;
    std::vector<EnvSample> env_schedule_;
    size_t next_env_ = 0;

    std::vector<SecurityEvent> pending_events_;  // fire countermeasures next cycle
    std::vector<ScheduledWrite> scheduled_writes_;
    std::vector<Leftover> flushed_;
    u64 completed_count_ = 0;

    SlaveLink* slave_by_id(u32 id);
    const SlaveLink* slave_by_id(u32 id) const;
};

}  // namespace buswarden
