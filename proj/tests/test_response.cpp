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

#include "buswarden/response.hpp"

using namespace buswarden;

namespace {

SecurityEvent event_of(EventKind kind) {
    SecurityEvent ev;
    ev.kind = kind;
    ev.cycle = 10;
    return ev;
}

}  // namespace

TEST_CASE("the response policy returns its configured action lists") {
    std::map<EventKind, std::vector<Countermeasure>> mapping;
    mapping[EventKind::Intrusion] = {Countermeasure::Lockdown};
    mapping[EventKind::AttributeTamper] = {Countermeasure::EraseKeys,
                                           Countermeasure::Lockdown};
    mapping[EventKind::PolicyMiss] = {};
    mapping[EventKind::QosViolation] = {};
    mapping[EventKind::BusTamper] = {Countermeasure::EraseKeys,
                                     Countermeasure::Lockdown};
    mapping[EventKind::EnvTamper] = {Countermeasure::SystemReset};
    ResponsePolicy policy = ResponsePolicy::from_map(mapping);

    CHECK(sre_handle(event_of(EventKind::Intrusion), policy) ==
          std::vector<Countermeasure>{Countermeasure::Lockdown});
    CHECK(sre_handle(event_of(EventKind::BusTamper), policy) ==
          (std::vector<Countermeasure>{Countermeasure::EraseKeys,
                                       Countermeasure::Lockdown}));
    CHECK(sre_handle(event_of(EventKind::PolicyMiss), policy).empty());
}

TEST_CASE("a policy that misses a kind is rejected at load") {
    std::map<EventKind, std::vector<Countermeasure>> mapping;
    mapping[EventKind::Intrusion] = {Countermeasure::Lockdown};
    CHECK_THROWS_AS(ResponsePolicy::from_map(mapping), BuildError);
}

TEST_CASE("the default policy covers all six kinds") {
    ResponsePolicy policy = ResponsePolicy::defaults();
    CHECK(policy.actions_for(EventKind::Intrusion) ==
          std::vector<Countermeasure>{Countermeasure::Lockdown});
    CHECK(policy.actions_for(EventKind::PolicyMiss) ==
          std::vector<Countermeasure>{Countermeasure::Lockdown});
    CHECK(policy.actions_for(EventKind::QosViolation) ==
          std::vector<Countermeasure>{Countermeasure::Lockdown});
    CHECK(policy.actions_for(EventKind::AttributeTamper) ==
          (std::vector<Countermeasure>{Countermeasure::EraseKeys,
                                       Countermeasure::Lockdown}));
    CHECK(policy.actions_for(EventKind::BusTamper) ==
          (std::vector<Countermeasure>{Countermeasure::EraseKeys,
                                       Countermeasure::DisableReadback,
                                       Countermeasure::Lockdown}));
    CHECK(policy.actions_for(EventKind::EnvTamper) ==
          (std::vector<Countermeasure>{Countermeasure::EraseKeys,
                                       Countermeasure::DisableCrypto,
                                       Countermeasure::Lockdown}));
}

TEST_CASE("countermeasures mutate exactly their own posture bit") {
    SystemSecurityState fresh;

    SystemSecurityState s = apply_countermeasure(fresh, Countermeasure::EraseKeys);
    CHECK_FALSE(s.keys_present);
    CHECK(s.crypto_enabled);
    CHECK(s.readback_enabled);
    CHECK_FALSE(s.locked_down);
    CHECK(s.reset_count == 0);

    // idempotence
    CHECK(apply_countermeasure(s, Countermeasure::EraseKeys) == s);
    SystemSecurityState locked =
        apply_countermeasure(fresh, Countermeasure::Lockdown);
    CHECK(apply_countermeasure(locked, Countermeasure::Lockdown) == locked);
    SystemSecurityState norb =
        apply_countermeasure(fresh, Countermeasure::DisableReadback);
    CHECK(apply_countermeasure(norb, Countermeasure::DisableReadback) == norb);
}

TEST_CASE("crypto disable survives a system reset") {
    SystemSecurityState s;
    s = apply_countermeasure(s, Countermeasure::DisableCrypto);
    CHECK_FALSE(s.crypto_enabled);
    s = apply_countermeasure(s, Countermeasure::SystemReset);
    CHECK_FALSE(s.crypto_enabled);
    CHECK(s.reset_count == 1);
    s = apply_countermeasure(s, Countermeasure::SystemReset);
    CHECK(s.reset_count == 2);
    CHECK_FALSE(s.crypto_enabled);
}

TEST_CASE("no countermeasure sequence re-enables crypto") {
    std::mt19937_64 rng(23);
    constexpr Countermeasure all[] = {
        Countermeasure::EraseKeys, Countermeasure::DisableCrypto,
        Countermeasure::DisableReadback, Countermeasure::Lockdown,
        Countermeasure::SystemReset};
    for (int trial = 0; trial < 100; ++trial) {
        SystemSecurityState s;
        s = apply_countermeasure(s, Countermeasure::DisableCrypto);
        for (int i = 0; i < 50; ++i) {
            s = apply_countermeasure(s, all[rng() % 5]);
            CHECK_FALSE(s.crypto_enabled);
        }
    }
}

TEST_CASE("identical event streams produce identical final postures") {
    ResponsePolicy policy = ResponsePolicy::defaults();
    std::vector<SecurityEvent> stream = {
        event_of(EventKind::Intrusion), event_of(EventKind::BusTamper),
        event_of(EventKind::EnvTamper), event_of(EventKind::Intrusion)};
    auto run = [&] {
        SystemSecurityState s;
        std::vector<Countermeasure> fired;
        for (const auto& ev : stream) {
            for (Countermeasure cm : sre_handle(ev, policy)) {
                fired.push_back(cm);
                s = apply_countermeasure(s, cm);
            }
        }
        return std::make_pair(s, fired);
    };
    auto a = run();
    auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("anti-tamper monitor flags strictly out-of-range parameters") {
    Thresholds thr;
    thr.voltage_min_mv = 700;
    thr.voltage_max_mv = 1100;
    thr.temp_min_mc = -20000;
    thr.temp_max_mc = 85000;
    thr.power_min_mw = 0;
    thr.power_max_mw = 5000;
    thr.validate();

    EnvSample mid{900, 32500, 2500, 5};
    CHECK_FALSE(ate_step(mid, thr).has_value());

    EnvSample hot = mid;
    hot.voltage_mv = 1101;  // one above the ceiling
    auto ev = ate_step(hot, thr);
    REQUIRE(ev.has_value());
    CHECK(ev->kind == EventKind::EnvTamper);
    CHECK(ev->source == EventSource::ATE);
    CHECK(ev->cycle == 5);

    EnvSample edge = mid;
    edge.temp_mc = -20000;  // boundary values are in range
    CHECK_FALSE(ate_step(edge, thr).has_value());
    edge.temp_mc = 85000;
    CHECK_FALSE(ate_step(edge, thr).has_value());
    edge.temp_mc = 85001;
    CHECK(ate_step(edge, thr).has_value());

    EnvSample starved = mid;
    starved.power_mw = -1;
    CHECK(ate_step(starved, thr).has_value());
}

TEST_CASE("inverted thresholds are rejected") {
    Thresholds thr;
    thr.voltage_min_mv = 1100;
    thr.voltage_max_mv = 700;
    CHECK_THROWS_AS(thr.validate(), BuildError);
}
