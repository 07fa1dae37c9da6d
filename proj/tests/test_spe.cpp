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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "buswarden/spe.hpp"

using namespace buswarden;

namespace {

PolicyEngine engine_with_tables() {
    // Guards an 8-register slave at 0x4000_0000. Master 0x0003 at base 0x40,
    // master 0x0007 at base 0x50.
    PolicyEngine spe(GuardConfig{0, 0x40000000, 8});
    REQUIRE(spe.configure(PolicyEngine::kControlOffset, 1) ==
            PolicyEngine::ConfigResult::Ok);
    REQUIRE(spe.configure(PolicyEngine::kDeviceBase + 0,
                          pack_device_word(0x0003, 0x0040)) ==
            PolicyEngine::ConfigResult::Ok);
    REQUIRE(spe.configure(PolicyEngine::kDeviceBase + 1,
                          pack_device_word(0x0007, 0x0050)) ==
            PolicyEngine::ConfigResult::Ok);

    // 0x0003: regs 0..3 read-only with the NS bit required clear, qos <= 3;
    // regs 4..7 stay default-deny.
    PolicyEntry ro;
    ro.read_allowed = true;
    ro.required_prot = 0b000;
    ro.prot_mask = 0b010;
    ro.qos_max = 3;
    for (u32 reg = 0; reg < 4; ++reg) {
        REQUIRE(spe.configure(PolicyEngine::kPolicyBase + 0x40 + reg,
                              pack_policy_entry(ro)) ==
                PolicyEngine::ConfigResult::Ok);
    }
    // 0x0007: full span read-write, attributes unconstrained, qos <= 15.
    PolicyEntry rw;
    rw.read_allowed = true;
    rw.write_allowed = true;
    rw.qos_max = 15;
    for (u32 reg = 0; reg < 8; ++reg) {
        REQUIRE(spe.configure(PolicyEngine::kPolicyBase + 0x50 + reg,
                              pack_policy_entry(rw)) ==
                PolicyEngine::ConfigResult::Ok);
    }
    return spe;
}

AccessQuery query(u16 user, Direction dir, u8 prot, u8 qos, u32 reg) {
    AccessQuery q;
    q.user_id = user;
    q.direction = dir;
    q.prot = prot;
    q.qos = qos;
    q.reg_offset = reg;
    return q;
}

}  // namespace

TEST_CASE("policy entry words pack to the documented layout") {
    PolicyEntry e;
    e.read_allowed = true;
    e.write_allowed = false;
    e.required_prot = 0b010;
    e.prot_mask = 0b110;
    e.qos_max = 7;
    CHECK(pack_policy_entry(e) == 0x7C9u);
    CHECK(unpack_policy_entry(0x7C9u) == e);

    // reserved bits vanish on unpack
    CHECK(unpack_policy_entry(0xFFFFF000u) == PolicyEntry{});
    for (u32 word : {0u, 0x3u, 0xF0Fu, 0x7C9u}) {
        CHECK(pack_policy_entry(unpack_policy_entry(word)) == word);
    }
    CHECK(pack_device_word(0x0003, 0x0040) == 0x00400003u);
}

TEST_CASE("device lookup is exact-match on the user id") {
    DeviceTable table(4);
    REQUIRE(table.write_slot(0, pack_device_word(0x0003, 0x0040)));
    CHECK(table.lookup(0x0003) == 0x0040);
    CHECK_FALSE(table.lookup(0x0009).has_value());

    DeviceTable empty(4);
    CHECK_FALSE(empty.lookup(0x0003).has_value());
}

TEST_CASE("the reserved unidentified id is never trusted") {
    DeviceTable table(4);
    // A slot write with user id 0 clears the slot rather than binding it.
    REQUIRE(table.write_slot(0, pack_device_word(0x0000, 0x0040)));
    CHECK_FALSE(table.lookup(0x0000).has_value());
    CHECK(table.occupied() == 0);
}

TEST_CASE("duplicate user ids are refused by the device table") {
    DeviceTable table(4);
    REQUIRE(table.write_slot(0, pack_device_word(0x0003, 0x0040)));
    CHECK_FALSE(table.write_slot(1, pack_device_word(0x0003, 0x0060)));
    // rebinding the same slot is fine
    CHECK(table.write_slot(0, pack_device_word(0x0003, 0x0060)));
    CHECK(table.lookup(0x0003) == 0x0060);
}

TEST_CASE("policy lookup respects the slave span and the table bounds") {
    PolicyTable table(64);
    PolicyEntry e;
    e.read_allowed = true;
    REQUIRE(table.write_word(0x22, pack_policy_entry(e)));
    CHECK(table.lookup(0x20, 2, 8) == e);
    CHECK_FALSE(table.lookup(0x20, 8, 8).has_value());   // beyond the span
    CHECK_FALSE(table.lookup(0x3C, 6, 8).has_value());   // beyond the table
    CHECK(table.lookup(0, 0, 8) == PolicyEntry{});       // default-deny word
}

TEST_CASE("decision checks apply in a fixed order") {
    PolicyEntry entry;
    entry.read_allowed = true;
    entry.write_allowed = false;
    entry.required_prot = 0b000;
    entry.prot_mask = 0b010;
    entry.qos_max = 3;

    // all three violated: the permission failure wins
    CHECK(decide(entry, query(3, Direction::Write, 0b010, 9, 0)) ==
          Decision::deny(DenyReason::PermissionDenied));
    // attribute and qos violated: the attribute failure wins
    CHECK(decide(entry, query(3, Direction::Read, 0b010, 9, 0)) ==
          Decision::deny(DenyReason::AttributeViolation));
    CHECK(decide(entry, query(3, Direction::Read, 0b000, 9, 0)) ==
          Decision::deny(DenyReason::QosViolation));
    CHECK(decide(entry, query(3, Direction::Read, 0b000, 3, 0)) ==
          Decision::grant());
    // masked-out bits do not participate
    CHECK(decide(entry, query(3, Direction::Read, 0b101, 3, 0)) ==
          Decision::grant());
}

TEST_CASE("a zero mask leaves attributes unconstrained") {
    PolicyEntry entry;
    entry.read_allowed = true;
    entry.qos_max = 15;
    for (u8 prot = 0; prot < 8; ++prot) {
        CHECK(decide(entry, query(3, Direction::Read, prot, 0, 0)).granted());
    }
}

TEST_CASE("pipeline: trusted master, miss, and the example bindings") {
    PolicyEngine spe = engine_with_tables();

    CHECK(spe.evaluate(query(0x0003, Direction::Read, 0b000, 0, 2)).granted());
    CHECK(spe.evaluate(query(0x0003, Direction::Read, 0b010, 0, 2)) ==
          Decision::deny(DenyReason::AttributeViolation));
    CHECK(spe.evaluate(query(0x0003, Direction::Write, 0b000, 0, 2)) ==
          Decision::deny(DenyReason::PermissionDenied));
    CHECK(spe.evaluate(query(0x0003, Direction::Read, 0b000, 0, 5)) ==
          Decision::deny(DenyReason::PermissionDenied));  // default-deny word
    CHECK(spe.evaluate(query(0x0009, Direction::Read, 0b000, 0, 0)) ==
          Decision::deny(DenyReason::UntrustedMaster));
    CHECK(spe.evaluate(query(0x0007, Direction::Write, 0b111, 15, 7)).granted());
    // beyond the guarded span
    CHECK(spe.evaluate(query(0x0007, Direction::Read, 0b000, 0, 8)) ==
          Decision::deny(DenyReason::PolicyMiss));
}

TEST_CASE("an empty device table denies everything as untrusted") {
    PolicyEngine spe(GuardConfig{0, 0x40000000, 8});
    spe.configure(PolicyEngine::kControlOffset, 1);
    for (u16 user : {u16{1}, u16{0x0003}, u16{0xFFFF}}) {
        for (Direction dir : {Direction::Read, Direction::Write}) {
            CHECK(spe.evaluate(query(user, dir, 0, 0, 0)) ==
                  Decision::deny(DenyReason::UntrustedMaster));
        }
    }
}

TEST_CASE("pipeline agrees with a brute-force reference") {
    PolicyEngine spe = engine_with_tables();
    // Naive re-derivation of the same configuration, written as one function.
    auto reference = [](u16 user, Direction dir, u8 prot, u8 qos,
                        u32 reg) -> Decision {
        if (reg >= 8) {
            if (user == 0x0003 || user == 0x0007) {
                return Decision::deny(DenyReason::PolicyMiss);
            }
            return Decision::deny(DenyReason::UntrustedMaster);
        }
        if (user == 0x0003) {
            if (reg < 4) {
                if (dir != Direction::Read) {
                    return Decision::deny(DenyReason::PermissionDenied);
                }
                if ((prot & 0b010) != 0) {
                    return Decision::deny(DenyReason::AttributeViolation);
                }
                if (qos > 3) return Decision::deny(DenyReason::QosViolation);
                return Decision::grant();
            }
            return Decision::deny(DenyReason::PermissionDenied);
        }
        if (user == 0x0007) {
            if (qos > 15) return Decision::deny(DenyReason::QosViolation);
            return Decision::grant();
        }
        return Decision::deny(DenyReason::UntrustedMaster);
    };

    for (u16 user : {u16{0x0003}, u16{0x0007}, u16{0x0009}}) {
        for (Direction dir : {Direction::Read, Direction::Write}) {
            for (u8 prot = 0; prot < 8; ++prot) {
                for (u8 qos : {u8{0}, u8{3}, u8{4}, u8{15}}) {
                    for (u32 reg : {0u, 3u, 4u, 7u, 8u, 100u}) {
                        CAPTURE(user, (int)dir, prot, qos, reg);
                        CHECK(spe.evaluate(query(user, dir, prot, qos, reg)) ==
                              reference(user, dir, prot, qos, reg));
                    }
                }
            }
        }
    }
}

TEST_CASE("configuration port: control, status, range checks") {
    PolicyEngine spe(GuardConfig{0, 0x40000000, 8}, 32, 2048);
    CHECK_FALSE(spe.enabled());
    CHECK(spe.configure(PolicyEngine::kControlOffset, 1) ==
          PolicyEngine::ConfigResult::Ok);
    CHECK(spe.enabled());
    CHECK(spe.read_register(PolicyEngine::kControlOffset) == 1u);

    // STATUS holds the deny counter and rejects writes
    CHECK(spe.read_register(PolicyEngine::kStatusOffset) == 0u);
    CHECK(spe.configure(PolicyEngine::kStatusOffset, 5) ==
          PolicyEngine::ConfigResult::SlvErr);

    // a device-table binding becomes visible to lookups
    CHECK(spe.configure(PolicyEngine::kDeviceBase + 3,
                        pack_device_word(0x0003, 0x0040)) ==
          PolicyEngine::ConfigResult::Ok);
    CHECK(spe.devices().lookup(0x0003) == 0x0040);
    CHECK(spe.read_register(PolicyEngine::kDeviceBase + 3) == 0x00400003u);

    // out-of-range offsets answer SLVERR
    CHECK(spe.configure(PolicyEngine::kDeviceBase + 32, 0) ==
          PolicyEngine::ConfigResult::SlvErr);
    CHECK(spe.configure(PolicyEngine::kPolicyBase + 2048, 0) ==
          PolicyEngine::ConfigResult::SlvErr);
    CHECK(spe.configure(0x50, 0) == PolicyEngine::ConfigResult::SlvErr);
}

TEST_CASE("gate: pass-through when disabled, hold and release when enabled") {
    PolicyEngine spe = engine_with_tables();

    ChannelBeat ar = make_addr_beat(Channel::AR, 0x40000008, ProtAttr{}, 0,
                                    0x0003);
    ar.ready = true;

    SUBCASE("disabled gates forward beats untouched") {
        PolicyEngine off(GuardConfig{0, 0x40000000, 8});
        auto act = off.gate_step(&ar, 0);
        REQUIRE(act.has_value());
        CHECK(act->kind == GateActionKind::PassThrough);
        CHECK(act->beat == ar);
        CHECK(off.phase() == GatePhase::Idle);
    }

    SUBCASE("a valid address beat is held while the tables are walked") {
        auto act = spe.gate_step(&ar, 10);
        REQUIRE(act.has_value());
        CHECK(act->kind == GateActionKind::HoldAndQuery);
        CHECK(spe.phase() == GatePhase::Held);
        REQUIRE(spe.held_beat().has_value());
        CHECK(*spe.held_beat() == ar);

        // two silent lookup cycles
        CHECK_FALSE(spe.gate_step(nullptr, 11).has_value());
        CHECK_FALSE(spe.gate_step(nullptr, 12).has_value());
        CHECK(spe.phase() == GatePhase::Held);

        auto rel = spe.gate_step(nullptr, 13);
        REQUIRE(rel.has_value());
        CHECK(rel->kind == GateActionKind::ReleaseGrant);
        CHECK(rel->beat == ar);
        CHECK(spe.phase() == GatePhase::Granted);
        spe.complete_release();
        CHECK(spe.phase() == GatePhase::Idle);
    }

    SUBCASE("a denied beat is discarded, never replayed") {
        ChannelBeat bad = make_addr_beat(Channel::AR, 0x40000008,
                                         ProtAttr::unpack(0b010), 0, 0x0003);
        bad.valid = true;
        spe.gate_step(&bad, 20);
        spe.gate_step(nullptr, 21);
        spe.gate_step(nullptr, 22);
        auto rel = spe.gate_step(nullptr, 23);
        REQUIRE(rel.has_value());
        CHECK(rel->kind == GateActionKind::ReleaseDeny);
        CHECK(rel->decision ==
              Decision::deny(DenyReason::AttributeViolation));
        CHECK(spe.phase() == GatePhase::Blocked);
        CHECK(spe.deny_count() == 1);
        CHECK(spe.read_register(PolicyEngine::kStatusOffset) == 1u);
        spe.complete_release();
        CHECK(spe.phase() == GatePhase::Idle);
    }
}

TEST_CASE("deny reports carry the kind for their reason") {
    PolicyEngine spe = engine_with_tables();
    AccessQuery q = query(0x0009, Direction::Read, 0, 0, 0);
    SecurityEvent ev =
        spe.report(Decision::deny(DenyReason::UntrustedMaster), q, 10);
    CHECK(ev.kind == EventKind::Intrusion);
    CHECK(ev.cycle == 10);
    CHECK(ev.source == EventSource::SPE);
    REQUIRE(ev.master.has_value());
    CHECK(ev.master->user_id == 0x0009);

    CHECK(event_kind_for(DenyReason::AttributeViolation) ==
          EventKind::AttributeTamper);
    CHECK(event_kind_for(DenyReason::PolicyMiss) == EventKind::PolicyMiss);
    CHECK(event_kind_for(DenyReason::QosViolation) == EventKind::QosViolation);
    CHECK(event_kind_for(DenyReason::PermissionDenied) == EventKind::Intrusion);
}

TEST_CASE("legacy ids never influence a decision") {
    PolicyEngine spe = engine_with_tables();
    // identical user id, wildly different legacy ids
    for (u32 legacy : {0u, 1u, 0xFFFFFFFFu}) {
        MasterTag tag{0x0003, legacy};
        (void)tag;  // tables key on user_id alone
        CHECK(spe.evaluate(query(0x0003, Direction::Read, 0, 0, 1)).granted());
    }
}
