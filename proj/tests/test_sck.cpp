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

#include <random>

#include "buswarden/sck.hpp"

using namespace buswarden;

namespace {

SanityChecker armed(u32 reload) {
    SanityChecker sck(MasterTag{0x0001, std::nullopt});
    REQUIRE(sck.write_reload(reload) == SanityChecker::ConfigResult::Ok);
    REQUIRE(sck.write_control(1) == SanityChecker::ConfigResult::Ok);
    return sck;
}

// Steps with the error held for `held` cycles starting at `start`, then
// deasserted; returns the events observed.
std::vector<SecurityEvent> run_burst(SanityChecker& sck, u64 start, u64 held,
                                     u64 tail) {
    std::vector<SecurityEvent> events;
    for (u64 c = 0; c < start + held + tail; ++c) {
        bool err = c >= start && c < start + held;
        if (auto ev = sck.step(err, c)) events.push_back(*ev);
    }
    return events;
}

}  // namespace

TEST_CASE("configuration: arm, reset, and the degenerate reload") {
    SanityChecker sck = armed(16);
    CHECK(sck.enabled());
    CHECK(sck.phase() == SanityChecker::Phase::Normal);
    CHECK(sck.timer() == 16);

    CHECK(sck.write_reload(0) == SanityChecker::ConfigResult::SlvErr);
    CHECK(sck.reload() == 16);

    // drive it into ATTACK, then clear through the control register
    auto events = run_burst(sck, 0, 17, 0);
    REQUIRE(events.size() == 1);
    CHECK(sck.phase() == SanityChecker::Phase::Attack);
    CHECK(sck.attack_latched());
    CHECK(sck.write_control(0) == SanityChecker::ConfigResult::Ok);
    CHECK(sck.phase() == SanityChecker::Phase::Normal);
    CHECK_FALSE(sck.attack_latched());
}

TEST_CASE("an error pulse enters DETECTION with the timer loaded") {
    SanityChecker sck = armed(16);
    auto ev = sck.step(true, 0);
    CHECK_FALSE(ev.has_value());
    CHECK(sck.phase() == SanityChecker::Phase::Detection);
    CHECK(sck.timer() == 16);
}

TEST_CASE("a sustained error reports on the 16th detection cycle") {
    // Hand-stepped: cycle 0 enters DETECTION with timer 16; cycles 1..16
    // decrement; the timer reaches 0 on cycle 16, which latches ATTACK.
    SanityChecker sck = armed(16);
    std::vector<SecurityEvent> events;
    for (u64 c = 0; c <= 16; ++c) {
        if (auto ev = sck.step(true, c)) events.push_back(*ev);
    }
    REQUIRE(events.size() == 1);
    CHECK(events[0].cycle == 16);
    CHECK(events[0].kind == EventKind::BusTamper);
    CHECK(events[0].source == EventSource::SCK);
    CHECK(sck.phase() == SanityChecker::Phase::Attack);
}

TEST_CASE("deassertion one cycle short of timeout returns to NORMAL") {
    SanityChecker sck = armed(16);
    auto events = run_burst(sck, 0, 16, 10);  // entry + 15 decrements
    CHECK(events.empty());
    CHECK(sck.phase() == SanityChecker::Phase::Normal);
    CHECK(sck.timer() == 16);
}

TEST_CASE("timeout boundary is exact for several reload values") {
    for (u32 reload : {2u, 16u, 1u << 20}) {
        CAPTURE(reload);
        {
            SanityChecker sck = armed(reload);
            auto events = run_burst(sck, 3, reload, 8);
            CHECK(events.empty());
            CHECK(sck.phase() == SanityChecker::Phase::Normal);
        }
        {
            SanityChecker sck = armed(reload);
            auto events = run_burst(sck, 3, reload + 1, 8);
            REQUIRE(events.size() == 1);
            CHECK(events[0].cycle == 3 + reload);
            CHECK(sck.phase() == SanityChecker::Phase::Attack);
            CHECK(sck.attack_latched());
        }
    }
}

TEST_CASE("at most one report per latch no matter the input") {
    SanityChecker sck = armed(4);
    std::vector<SecurityEvent> events;
    std::mt19937_64 rng(7);
    for (u64 c = 0; c < 4000; ++c) {
        bool err = c < 100 ? true : (rng() & 1);
        if (auto ev = sck.step(err, c)) events.push_back(*ev);
    }
    CHECK(events.size() == 1);
    CHECK(sck.phase() == SanityChecker::Phase::Attack);
}

TEST_CASE("disabled checkers are transparent") {
    SanityChecker sck(MasterTag{0x0001, std::nullopt});
    REQUIRE(sck.write_reload(4) == SanityChecker::ConfigResult::Ok);
    std::mt19937_64 rng(9);
    for (u64 c = 0; c < 1000; ++c) {
        auto ev = sck.step(rng() & 1, c);
        CHECK_FALSE(ev.has_value());
    }
    CHECK(sck.phase() == SanityChecker::Phase::Normal);
    CHECK(sck.timer() == 4);
    CHECK_FALSE(sck.attack_latched());
}

TEST_CASE("attack is unreachable below reload+1 consecutive error cycles") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        u32 reload = 2 + static_cast<u32>(rng() % 6);
        SanityChecker sck = armed(reload);
        u64 cycle = 0;
        for (int burst = 0; burst < 40; ++burst) {
            u64 len = rng() % reload;  // always shorter than reload
            for (u64 i = 0; i < len; ++i) {
                CHECK_FALSE(sck.step(true, cycle++).has_value());
            }
            CHECK_FALSE(sck.step(false, cycle++).has_value());
        }
        CHECK(sck.phase() != SanityChecker::Phase::Attack);
    }
}

TEST_CASE("status word carries the latch bit and the report cycle") {
    SanityChecker sck = armed(2);
    CHECK(sck.status_word() == 0);
    auto events = run_burst(sck, 5, 3, 0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].cycle == 7);
    CHECK((sck.status_word() & 1u) == 1u);
    CHECK((sck.status_word() >> 8) == 7u);
    CHECK(sck.read_register(SanityChecker::kStatusOffset) == sck.status_word());
    // STATUS rejects writes
    CHECK(sck.configure(SanityChecker::kStatusOffset, 1) ==
          SanityChecker::ConfigResult::SlvErr);
}
