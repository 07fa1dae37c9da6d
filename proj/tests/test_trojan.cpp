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

#include "buswarden/trojan.hpp"

using namespace buswarden;

namespace {

ChannelBeat aw(u32 addr, u8 prot) {
    return make_addr_beat(Channel::AW, addr, ProtAttr::unpack(prot), 0, 3);
}

}  // namespace

TEST_CASE("ns bit flip inverts only the NS bit of address beats") {
    TrojanModel model;
    model.kind = TrojanKind::NsBitFlip;
    model.window = {10, 100};

    ChannelBeat beat = aw(0x40000000, 0b000);
    ChannelBeat out = apply_trojan(model, beat, 50);
    CHECK(out.addr().prot.pack() == 0b010);
    CHECK(out.addr().addr == beat.addr().addr);
    CHECK(out.addr().qos == beat.addr().qos);
    CHECK(out.addr().user == beat.addr().user);

    // flipping twice restores
    CHECK(apply_trojan(model, out, 50) == beat);

    // data and response beats pass through untouched
    ChannelBeat w = make_data_beat(7, 3);
    CHECK(apply_trojan(model, w, 50) == w);
    ChannelBeat r = make_resp_beat(Channel::R, RespStatus::Okay, 0, 3);
    CHECK(apply_trojan(model, r, 50) == r);
}

TEST_CASE("outside the activation window every kind is a plain wire") {
    ChannelBeat beat = aw(0x40000000, 0b000);
    ChannelBeat resp = make_resp_beat(Channel::R, RespStatus::Okay, 0, 3);
    for (TrojanKind kind :
         {TrojanKind::NsBitFlip, TrojanKind::ForcedErrorResponse,
          TrojanKind::AddressRedirect, TrojanKind::HandshakeStall}) {
        TrojanModel model;
        model.kind = kind;
        model.window = {10, 100};
        model.match_base = 0x40000000;
        model.match_limit = 0x4FFFFFFF;
        model.redirect_target = 0x80000000;
        CHECK(apply_trojan(model, beat, 9) == beat);
        CHECK(apply_trojan(model, beat, 101) == beat);
        CHECK(apply_trojan(model, resp, 9) == resp);
    }
}

TEST_CASE("forced error rewrites response status and drives the level") {
    TrojanModel model;
    model.kind = TrojanKind::ForcedErrorResponse;
    model.window = {0, 20};
    model.forced_resp = RespStatus::SlvErr;

    ChannelBeat r = make_resp_beat(Channel::R, RespStatus::Okay, 0x55, 3);
    ChannelBeat out = apply_trojan(model, r, 5);
    CHECK(out.resp().resp == RespStatus::SlvErr);
    CHECK(out.resp().data == 0x55);  // only the status is touched

    ChannelBeat b = make_resp_beat(Channel::B, RespStatus::Okay, 0, 3);
    CHECK(apply_trojan(model, b, 5).resp().resp == RespStatus::SlvErr);

    // address beats are not its business
    ChannelBeat a = aw(0x1000, 0);
    CHECK(apply_trojan(model, a, 5) == a);

    CHECK(forced_response_level(model, 5) == RespStatus::SlvErr);
    CHECK_FALSE(forced_response_level(model, 21).has_value());
}

TEST_CASE("address redirect rebases matching addresses") {
    TrojanModel model;
    model.kind = TrojanKind::AddressRedirect;
    model.window = {0, 1000};
    model.match_base = 0x40000000;
    model.match_limit = 0x400000FF;
    model.redirect_target = 0x50000000;

    CHECK(apply_trojan(model, aw(0x40000010, 0), 1).addr().addr == 0x50000010);
    CHECK(apply_trojan(model, aw(0x40000100, 0), 1).addr().addr == 0x40000100);
    CHECK(apply_trojan(model, aw(0x3FFFFFFC, 0), 1).addr().addr == 0x3FFFFFFC);

    ChannelBeat ar = make_addr_beat(Channel::AR, 0x40000000, ProtAttr{}, 0, 3);
    CHECK(apply_trojan(model, ar, 1).addr().addr == 0x50000000);
}

TEST_CASE("handshake stall deasserts ready inside its window") {
    TrojanModel model;
    model.kind = TrojanKind::HandshakeStall;
    model.window = {5, 9};

    ChannelBeat beat = aw(0x1000, 0);
    beat.ready = true;
    CHECK_FALSE(apply_trojan(model, beat, 7).ready);
    CHECK(apply_trojan(model, beat, 4).ready);
    CHECK(stalls_link(model, 5));
    CHECK(stalls_link(model, 9));
    CHECK_FALSE(stalls_link(model, 10));
}
