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

#include "buswarden/fabric.hpp"

#include <algorithm>
#include <set>

namespace buswarden {

namespace {

bool link_stalled(const std::vector<TrojanModel>& trojans, u64 cycle) {
    for (const auto& t : trojans) {
        if (stalls_link(t, cycle)) return true;
    }
    return false;
}

ChannelBeat through_interposers(const std::vector<TrojanModel>& trojans,
                                ChannelBeat beat, u64 cycle) {
    for (const auto& t : trojans) beat = apply_trojan(t, beat, cycle);
    return beat;
}

}  // namespace

Simulator::Simulator(Topology topology) : topo_(std::move(topology)) {
    std::set<u16> user_ids;
    for (const auto& m : topo_.masters) {
        if (!user_ids.insert(m.tag.user_id).second) {
            throw BuildError("duplicate master user id " +
                             std::to_string(m.tag.user_id));
        }
        for (const auto& item : m.script) {
            if (item.address % 4 != 0) {
                throw BuildError("master '" + m.name +
                                 "' script has unaligned address");
            }
            if (item.qos > 15) {
                throw BuildError("master '" + m.name +
                                 "' script has qos above 15");
            }
        }
    }

    std::vector<AddressMap::Entry> entries;
    std::set<u32> slave_ids;
    for (const auto& s : topo_.slaves) {
        if (!slave_ids.insert(s.id).second) {
            throw BuildError("duplicate slave id " + std::to_string(s.id));
        }
        if (s.regs == 0) {
            throw BuildError("slave '" + s.name + "' has no registers");
        }
        if (s.latency == 0) {
            throw BuildError("slave '" + s.name + "' latency must be >= 1");
        }
        if (s.base % 4 != 0) {
            throw BuildError("slave '" + s.name + "' base is not word aligned");
        }
        u64 limit = static_cast<u64>(s.base) + static_cast<u64>(s.regs) * 4 - 1;
        if (limit > 0xFFFFFFFFull) {
            throw BuildError("slave '" + s.name + "' window exceeds 32 bits");
        }
        entries.push_back({s.id, s.base, static_cast<u32>(limit)});
    }
    map_ = AddressMap(std::move(entries));

    if (topo_.watchdog_horizon == 0) {
        throw BuildError("watchdog horizon must be >= 1");
    }

    masters_.reserve(topo_.masters.size());
    for (const auto& m : topo_.masters) {
        MasterLink link;
        link.cfg = m;
        link.sck = SanityChecker(m.tag);
        masters_.push_back(std::move(link));
    }
    slaves_.reserve(topo_.slaves.size());
    for (const auto& s : topo_.slaves) {
        SlaveLink link;
        link.cfg = s;
        link.file.assign(s.regs, 0u);
        if (s.guarded) {
            link.spe.emplace(GuardConfig{s.id, s.base, s.regs},
                             topo_.spe_device_capacity,
                             topo_.spe_policy_capacity);
        }
        slaves_.push_back(std::move(link));
    }

    for (const auto& ip : topo_.interposers) {
        if (ip.position.type == LinkRef::Type::Master) {
            if (ip.position.id >= masters_.size()) {
                throw BuildError("interposer on nonexistent master link " +
                                 std::to_string(ip.position.id));
            }
            masters_[ip.position.id].trojans.push_back(ip.model);
        } else {
            SlaveLink* link = slave_by_id(ip.position.id);
            if (!link) {
                throw BuildError("interposer on nonexistent slave link " +
                                 std::to_string(ip.position.id));
            }
            link->trojans.push_back(ip.model);
        }
    }
}

Simulator::SlaveLink* Simulator::slave_by_id(u32 id) {
    for (auto& s : slaves_) {
        if (s.cfg.id == id) return &s;
    }
    return nullptr;
}

const Simulator::SlaveLink* Simulator::slave_by_id(u32 id) const {
    for (const auto& s : slaves_) {
        if (s.cfg.id == id) return &s;
    }
    return nullptr;
}

PolicyEngine::ConfigResult Simulator::spe_configure(u32 slave_id, u32 offset,
                                                    u32 word) {
    SlaveLink* link = slave_by_id(slave_id);
    if (!link || !link->spe) return PolicyEngine::ConfigResult::SlvErr;
    return link->spe->configure(offset, word);
}

std::optional<u32> Simulator::spe_read(u32 slave_id, u32 offset) const {
    const SlaveLink* link = slave_by_id(slave_id);
    if (!link || !link->spe) return std::nullopt;
    return link->spe->read_register(offset);
}

SanityChecker::ConfigResult Simulator::sck_configure(u32 master_index,
                                                     u32 offset, u32 word) {
    if (master_index >= masters_.size()) {
        return SanityChecker::ConfigResult::SlvErr;
    }
    return masters_[master_index].sck.configure(offset, word);
}

std::optional<u32> Simulator::sck_read(u32 master_index, u32 offset) const {
    if (master_index >= masters_.size()) return std::nullopt;
    return masters_[master_index].sck.read_register(offset);
}

void Simulator::schedule_config_write(const ScheduledWrite& write) {
    scheduled_writes_.push_back(write);
}

void Simulator::set_response_policy(ResponsePolicy policy) {
    response_policy_ = std::move(policy);
}

void Simulator::set_thresholds(std::optional<Thresholds> thresholds) {
    if (thresholds) thresholds->validate();
    thresholds_ = thresholds;
}

void Simulator::set_env_schedule(std::vector<EnvSample> samples) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const EnvSample& a, const EnvSample& b) {
                         return a.cycle < b.cycle;
                     });
    env_schedule_ = std::move(samples);
    next_env_ = 0;
}

u64 Simulator::scripted_count() const {
    u64 n = 0;
    for (const auto& m : topo_.masters) n += m.script.size();
    return n;
}

TickReport Simulator::step() {
    TickReport report;
    report.cycle = cycle_;
    phase_boundary(report);
    phase_env(report);
    phase_deliver(report);
    phase_slave_links(report);
    phase_route(report);
    phase_watchdog(report);
    pending_events_.insert(pending_events_.end(), report.events.begin(),
                           report.events.end());
    ++cycle_;
    return report;
}

void Simulator::phase_boundary(TickReport& report) {
    std::vector<SecurityEvent> events;
    events.swap(pending_events_);
    for (const auto& ev : events) {
        for (Countermeasure cm : response_policy_.actions_for(ev.kind)) {
            security_ = apply_countermeasure(security_, cm);
            if (cm == Countermeasure::SystemReset) flush_pending();
            report.countermeasures.push_back({cycle_, cm, ev.kind});
        }
    }
    for (const auto& w : scheduled_writes_) {
        if (w.cycle != cycle_) continue;
        if (w.target.kind == ConfigTarget::Kind::Spe) {
            spe_configure(w.target.id, w.offset, w.word);
        } else {
            sck_configure(w.target.id, w.offset, w.word);
        }
    }
}

void Simulator::phase_env(TickReport& report) {
    while (next_env_ < env_schedule_.size() &&
           env_schedule_[next_env_].cycle <= cycle_) {
        if (env_schedule_[next_env_].cycle == cycle_ && thresholds_) {
            if (auto ev = ate_step(env_schedule_[next_env_], *thresholds_)) {
                report.events.push_back(*ev);
            }
        }
        ++next_env_;
    }
}

void Simulator::phase_deliver(TickReport& report) {
    for (u32 mi = 0; mi < masters_.size(); ++mi) deliver_one(mi, report);
}

void Simulator::deliver_one(u32 mi, TickReport& report) {
    MasterLink& ml = masters_[mi];
    bool stalled = link_stalled(ml.trojans, cycle_);
    bool delivered = false;
    bool error_level = false;

    if (!stalled && !ml.resp_queue.empty() &&
        ml.resp_queue.front().arrival <= cycle_) {
        StagedBeat staged = ml.resp_queue.front();
        ml.resp_queue.erase(ml.resp_queue.begin());
        ChannelBeat beat = through_interposers(ml.trojans, staged.beat, cycle_);
        report.transfers.push_back(record_for(cycle_, Port::Master, beat,
                                              ml.cfg.tag.user_id,
                                              staged.from_slave));
        delivered = true;
        error_level = is_error(beat.resp().resp);
        // A matching serial completes the transaction even if the master was
        // still waiting to send write data; the data phase is abandoned.
        if (ml.outstanding && ml.outstanding->serial == staged.serial) {
            Channel want = ml.outstanding->item.direction == Direction::Read
                               ? Channel::R
                               : Channel::B;
            if (beat.channel == want) {
                CompletedTxn done;
                done.master_index = mi;
                done.user = ml.cfg.tag.user_id;
                done.direction = ml.outstanding->item.direction;
                done.address = ml.outstanding->item.address;
                done.prot = ml.outstanding->item.prot.pack();
                done.qos = ml.outstanding->item.qos;
                done.scripted_cycle = ml.outstanding->scripted_cycle;
                done.issue_cycle = ml.outstanding->first_drive_cycle;
                done.complete_cycle = cycle_;
                done.status = beat.resp().resp;
                report.completed.push_back(done);
                ++completed_count_;
                ml.outstanding.reset();
            }
        }
    }

    if (!delivered && !stalled) {
        for (const auto& t : ml.trojans) {
            auto forced = forced_response_level(t, cycle_);
            if (!forced) continue;
            // The trojan keeps the response wires driven; the master is
            // always ready on B/R, so a forged beat transfers every cycle.
            Channel ch = Channel::R;
            bool completes = false;
            if (ml.outstanding &&
                ml.outstanding->phase == Outstanding::Phase::WaitResp) {
                ch = ml.outstanding->item.direction == Direction::Read
                         ? Channel::R
                         : Channel::B;
                completes = true;
            }
            ChannelBeat beat = make_resp_beat(ch, *forced, 0, ml.cfg.tag.user_id);
            beat.ready = true;
            report.transfers.push_back(record_for(cycle_, Port::Master, beat,
                                                  ml.cfg.tag.user_id,
                                                  std::nullopt));
            error_level = true;
            if (completes) {
                CompletedTxn done;
                done.master_index = mi;
                done.user = ml.cfg.tag.user_id;
                done.direction = ml.outstanding->item.direction;
                done.address = ml.outstanding->item.address;
                done.prot = ml.outstanding->item.prot.pack();
                done.qos = ml.outstanding->item.qos;
                done.scripted_cycle = ml.outstanding->scripted_cycle;
                done.issue_cycle = ml.outstanding->first_drive_cycle;
                done.complete_cycle = cycle_;
                done.status = *forced;
                report.completed.push_back(done);
                ++completed_count_;
                ml.outstanding.reset();
            }
            break;
        }
    }

    if (auto ev = ml.sck.step(error_level, cycle_)) {
        report.events.push_back(*ev);
    }
}

void Simulator::schedule_response(u32 owner, u64 serial, Channel channel,
                                  RespStatus status, u32 data, u16 user,
                                  std::optional<u32> from_slave) {
    ChannelBeat beat = make_resp_beat(channel, status, data, user);
    beat.ready = true;
    StagedBeat staged;
    staged.beat = beat;
    staged.owner = owner;
    staged.serial = serial;
    staged.arrival = cycle_ + 1;
    staged.from_slave = from_slave;
    masters_[owner].resp_queue.push_back(staged);
}

void Simulator::slave_drive(SlaveLink& link, TickReport& report) {
    if (!link.busy) return;
    if (link.countdown > 0) {
        --link.countdown;
    }
    if (link.countdown > 0) return;
    if (link_stalled(link.trojans, cycle_)) return;  // retry next cycle

    Channel ch = link.cur_dir == Direction::Read ? Channel::R : Channel::B;
    RespStatus status =
        link.cur_reg_valid ? RespStatus::Okay : RespStatus::SlvErr;
    u32 data = 0;
    if (link.cur_reg_valid && link.cur_dir == Direction::Read) {
        data = link.file[link.cur_reg];
    }
    ChannelBeat beat = make_resp_beat(ch, status, data, link.cur_user);
    beat.ready = true;
    report.transfers.push_back(
        record_for(cycle_, Port::Slave, beat, link.cur_user, link.cfg.id));

    ChannelBeat routed = through_interposers(link.trojans, beat, cycle_);
    StagedBeat staged;
    staged.beat = routed;
    staged.owner = link.cur_owner;
    staged.serial = link.cur_serial;
    staged.arrival = cycle_ + 1;
    staged.from_slave = link.cfg.id;
    masters_[link.cur_owner].resp_queue.push_back(staged);
    link.busy = false;
}

void Simulator::slave_accept_addr(SlaveLink& link, const StagedBeat& staged,
                                  TickReport& report) {
    const ChannelBeat& beat = staged.beat;
    const AddrSignals& sig = beat.addr();
    report.transfers.push_back(
        record_for(cycle_, Port::Slave, beat, sig.user, link.cfg.id));
    link.cur_owner = staged.owner;
    link.cur_serial = staged.serial;
    link.cur_user = sig.user;
    u64 limit = static_cast<u64>(link.cfg.base) +
                static_cast<u64>(link.cfg.regs) * 4 - 1;
    link.cur_reg_valid = sig.addr >= link.cfg.base && sig.addr <= limit;
    link.cur_reg = link.cur_reg_valid ? (sig.addr - link.cfg.base) / 4 : 0;
    if (beat.channel == Channel::AR) {
        link.cur_dir = Direction::Read;
        link.busy = true;
        link.countdown = link.cfg.latency;
    } else {
        link.cur_dir = Direction::Write;
        link.have_aw = true;
    }
}

void Simulator::slave_accept_wdata(SlaveLink& link, const StagedBeat& staged,
                                   TickReport& report) {
    report.transfers.push_back(record_for(cycle_, Port::Slave, staged.beat,
                                          link.cur_user, link.cfg.id));
    if (link.cur_reg_valid) {
        link.file[link.cur_reg] = staged.beat.data().data;
    }
    link.have_aw = false;
    link.busy = true;
    link.countdown = link.cfg.latency;
}

void Simulator::gate_deny(SlaveLink& link, const StagedBeat& staged,
                          const Decision& decision, TickReport& report) {
    const ChannelBeat& beat = staged.beat;
    Channel resp_ch = beat.channel == Channel::AR ? Channel::R : Channel::B;
    schedule_response(staged.owner, staged.serial, resp_ch, RespStatus::DecErr,
                      0, beat.addr().user, link.cfg.id);
    AccessQuery q;
    q.user_id = beat.addr().user;
    report.events.push_back(link.spe->report(decision, q, cycle_));
    if (beat.channel == Channel::AW) {
        // The companion write data never reaches the slave.
        if (link.gate_wdata && link.gate_wdata->serial == staged.serial) {
            link.gate_wdata.reset();
        } else {
            link.discard_wdata_serial = staged.serial;
        }
    }
}

void Simulator::phase_slave_links(TickReport& report) {
    for (auto& link : slaves_) {
        bool stalled = link_stalled(link.trojans, cycle_);

        // 1. Drive a finished response toward the interconnect.
        slave_drive(link, report);
        bool slave_free = !link.busy && !link.have_aw;

        bool gate_on = link.spe && link.spe->enabled();
        // A disabled engine still drains anything it already holds.
        bool gate_active =
            link.spe && (gate_on || link.spe->phase() != GatePhase::Idle);

        // 2. Hand gate-buffered write data to the slave (the cycle after its
        //    address beat).
        if (gate_active && link.pending_grant &&
            link.pending_grant->beat.channel == Channel::AW && link.have_aw &&
            link.cur_serial == link.pending_grant->serial && link.gate_wdata) {
            slave_accept_wdata(link, *link.gate_wdata, report);
            link.gate_wdata.reset();
            link.pending_grant.reset();
            link.spe->complete_release();
            slave_free = false;
        }

        // 3. Let a held gate act once its lookup cycles elapse.
        if (gate_active && link.spe->phase() == GatePhase::Held) {
            if (auto act = link.spe->gate_step(nullptr, cycle_)) {
                StagedBeat held;
                held.beat = act->beat;
                held.owner = link.gate_owner;
                held.serial = link.gate_serial;
                if (act->kind == GateActionKind::ReleaseGrant) {
                    link.pending_grant = held;
                } else if (act->kind == GateActionKind::ReleaseDeny) {
                    gate_deny(link, held, act->decision, report);
                    link.spe->complete_release();
                }
            }
        }

        // 4. Replay a granted address beat once the slave can take it.
        slave_free = !link.busy && !link.have_aw;
        if (gate_active && link.pending_grant && slave_free &&
            link.spe->phase() == GatePhase::Granted) {
            slave_accept_addr(link, *link.pending_grant, report);
            if (link.pending_grant->beat.channel == Channel::AR) {
                link.pending_grant.reset();
                link.spe->complete_release();
            }
            slave_free = false;
        }

        // 5. Write data arriving over the link.
        if (link.wdata_stage && link.wdata_stage->arrival <= cycle_ && !stalled) {
            StagedBeat staged = *link.wdata_stage;
            staged.beat = through_interposers(link.trojans, staged.beat, cycle_);
            if (link.discard_wdata_serial &&
                *link.discard_wdata_serial == staged.serial) {
                link.wdata_stage.reset();
                link.discard_wdata_serial.reset();
            } else if (link.spe) {
                bool gate_owns =
                    (link.spe->phase() == GatePhase::Held ||
                     link.spe->phase() == GatePhase::Granted) &&
                    link.gate_serial == staged.serial;
                if (gate_active && gate_owns && !link.gate_wdata) {
                    link.gate_wdata = staged;
                    link.wdata_stage.reset();
                } else if (!gate_on && link.have_aw &&
                           link.cur_serial == staged.serial) {
                    slave_accept_wdata(link, staged, report);
                    link.wdata_stage.reset();
                }
            } else if (link.have_aw && link.cur_serial == staged.serial) {
                slave_accept_wdata(link, staged, report);
                link.wdata_stage.reset();
            }
        }

        // 6. Address beat arriving over the link: lockdown clamp, gate
        //    sample, or plain presentation.
        if (link.addr_stage && link.addr_stage->arrival <= cycle_ && !stalled) {
            StagedBeat staged = *link.addr_stage;
            staged.beat = through_interposers(link.trojans, staged.beat, cycle_);
            if (security_.locked_down && link.spe) {
                // Guarded slaves refuse every new transaction under lockdown,
                // independent of the engine's enable bit.
                Channel resp_ch = staged.beat.channel == Channel::AR
                                      ? Channel::R
                                      : Channel::B;
                schedule_response(staged.owner, staged.serial, resp_ch,
                                  RespStatus::DecErr, 0,
                                  staged.beat.addr().user, link.cfg.id);
                if (staged.beat.channel == Channel::AW) {
                    link.discard_wdata_serial = staged.serial;
                }
                link.addr_stage.reset();
            } else if (gate_on) {
                if (link.spe->phase() == GatePhase::Idle) {
                    link.spe->gate_step(&staged.beat, cycle_);
                    link.gate_owner = staged.owner;
                    link.gate_serial = staged.serial;
                    link.addr_stage.reset();
                }
                // otherwise the beat waits; the gate is busy
            } else {
                slave_free = !link.busy && !link.have_aw;
                if (slave_free) {
                    slave_accept_addr(link, staged, report);
                    link.addr_stage.reset();
                }
            }
        }
    }
}

void Simulator::phase_route(TickReport& report) {
    for (u32 mi = 0; mi < masters_.size(); ++mi) {
        MasterLink& ml = masters_[mi];
        if (!ml.outstanding && ml.next_script < ml.cfg.script.size() &&
            ml.cfg.script[ml.next_script].issue_cycle <= cycle_) {
            Outstanding o;
            o.item = ml.cfg.script[ml.next_script];
            o.serial = next_serial_++;
            o.scripted_cycle = o.item.issue_cycle;
            o.first_drive_cycle = cycle_;
            ml.outstanding = o;
            ++ml.next_script;
        }
        if (!ml.outstanding) continue;
        Outstanding& o = *ml.outstanding;
        if (link_stalled(ml.trojans, cycle_)) continue;

        if (o.phase == Outstanding::Phase::DriveAddr) {
            Channel ch = o.item.direction == Direction::Read ? Channel::AR
                                                             : Channel::AW;
            ChannelBeat original = make_addr_beat(
                ch, o.item.address, o.item.prot, o.item.qos, ml.cfg.tag.user_id);
            original.ready = true;
            ChannelBeat routed =
                through_interposers(ml.trojans, original, cycle_);
            auto target = map_.decode(routed.addr().addr);
            if (!target) {
                report.transfers.push_back(record_for(
                    cycle_, Port::Master, original, ml.cfg.tag.user_id,
                    std::nullopt));
                // Unmapped: the interconnect answers DECERR one cycle later
                // and the write data phase is skipped.
                schedule_response(mi, o.serial,
                                  ch == Channel::AR ? Channel::R : Channel::B,
                                  RespStatus::DecErr, 0, ml.cfg.tag.user_id);
                o.phase = Outstanding::Phase::WaitResp;
            } else {
                SlaveLink* sl = slave_by_id(*target);
                if (!sl->addr_stage) {
                    report.transfers.push_back(record_for(
                        cycle_, Port::Master, original, ml.cfg.tag.user_id,
                        *target));
                    StagedBeat staged;
                    staged.beat = routed;
                    staged.owner = mi;
                    staged.serial = o.serial;
                    staged.arrival = cycle_ + 1;
                    staged.from_slave = *target;
                    sl->addr_stage = staged;
                    o.routed_slave = *target;
                    o.phase = o.item.direction == Direction::Write
                                  ? Outstanding::Phase::DriveData
                                  : Outstanding::Phase::WaitResp;
                }
            }
        } else if (o.phase == Outstanding::Phase::DriveData) {
            SlaveLink* sl = slave_by_id(*o.routed_slave);
            if (!sl->wdata_stage) {
                ChannelBeat w = make_data_beat(o.item.data, ml.cfg.tag.user_id);
                w.ready = true;
                ChannelBeat routed = through_interposers(ml.trojans, w, cycle_);
                report.transfers.push_back(record_for(cycle_, Port::Master, w,
                                                      ml.cfg.tag.user_id,
                                                      *o.routed_slave));
                StagedBeat staged;
                staged.beat = routed;
                staged.owner = mi;
                staged.serial = o.serial;
                staged.arrival = cycle_ + 1;
                staged.from_slave = *o.routed_slave;
                sl->wdata_stage = staged;
                o.phase = Outstanding::Phase::WaitResp;
            }
        }
    }
}

void Simulator::phase_watchdog(TickReport& report) {
    for (u32 mi = 0; mi < masters_.size(); ++mi) {
        MasterLink& ml = masters_[mi];
        if (!ml.outstanding || ml.outstanding->stall_reported) continue;
        if (cycle_ - ml.outstanding->first_drive_cycle >=
            topo_.watchdog_horizon) {
            ml.outstanding->stall_reported = true;
            StallRecord stall;
            stall.master_index = mi;
            stall.user = ml.cfg.tag.user_id;
            stall.cycle = cycle_;
            stall.address = ml.outstanding->item.address;
            stall.channel = ml.outstanding->item.direction == Direction::Read
                                ? Channel::AR
                                : Channel::AW;
            report.stalls.push_back(stall);
        }
    }
}

void Simulator::flush_pending() {
    for (u32 mi = 0; mi < masters_.size(); ++mi) {
        MasterLink& ml = masters_[mi];
        ml.resp_queue.clear();
        if (ml.outstanding) {
            Leftover left;
            left.master_index = mi;
            left.user = ml.cfg.tag.user_id;
            left.direction = ml.outstanding->item.direction;
            left.address = ml.outstanding->item.address;
            left.scripted_cycle = ml.outstanding->scripted_cycle;
            left.first_drive_cycle = ml.outstanding->first_drive_cycle;
            left.stalled = ml.outstanding->stall_reported;
            left.flushed = true;
            flushed_.push_back(left);
            ml.outstanding.reset();
        }
    }
    for (auto& link : slaves_) {
        link.addr_stage.reset();
        link.wdata_stage.reset();
        link.gate_wdata.reset();
        link.pending_grant.reset();
        link.discard_wdata_serial.reset();
        link.busy = false;
        link.have_aw = false;
        link.countdown = 0;
        std::fill(link.file.begin(), link.file.end(), 0u);
        if (link.spe) link.spe->reset_gate();
    }
}

std::vector<Simulator::Leftover> Simulator::unfinished() const {
    std::vector<Leftover> out;
    for (u32 mi = 0; mi < masters_.size(); ++mi) {
        const MasterLink& ml = masters_[mi];
        if (ml.outstanding) {
            Leftover left;
            left.master_index = mi;
            left.user = ml.cfg.tag.user_id;
            left.direction = ml.outstanding->item.direction;
            left.address = ml.outstanding->item.address;
            left.scripted_cycle = ml.outstanding->scripted_cycle;
            left.first_drive_cycle = ml.outstanding->first_drive_cycle;
            left.stalled = ml.outstanding->stall_reported;
            out.push_back(left);
        }
        for (size_t i = ml.next_script; i < ml.cfg.script.size(); ++i) {
            Leftover left;
            left.master_index = mi;
            left.user = ml.cfg.tag.user_id;
            left.direction = ml.cfg.script[i].direction;
            left.address = ml.cfg.script[i].address;
            left.scripted_cycle = ml.cfg.script[i].issue_cycle;
            out.push_back(left);
        }
    }
    return out;
}

TransferRecord Simulator::record_for(u64 cycle, Port port,
                                     const ChannelBeat& beat, u16 user,
                                     std::optional<u32> slave_id) const {
    TransferRecord r;
    r.cycle = cycle;
    r.port = port;
    r.channel = beat.channel;
    r.user = user;
    r.slave_id = slave_id;
    switch (beat.channel) {
        case Channel::AW:
        case Channel::AR:
            r.addr = beat.addr().addr;
            r.prot = beat.addr().prot.pack();
            r.qos = beat.addr().qos;
            break;
        case Channel::B:
        case Channel::R:
            r.resp = beat.resp().resp;
            break;
        case Channel::W:
            break;
    }
    return r;
}

}  // namespace buswarden
