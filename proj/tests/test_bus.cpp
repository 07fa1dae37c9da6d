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

#include "buswarden/bus.hpp"

using namespace buswarden;

TEST_CASE("prot attributes pack and unpack losslessly") {
    for (u8 bits = 0; bits < 8; ++bits) {
        ProtAttr p = ProtAttr::unpack(bits);
        CHECK(p.pack() == bits);
    }
    ProtAttr p{true, false, true};
    CHECK(ProtAttr::unpack(p.pack()) == p);
}

TEST_CASE("the NS bit is bit 1 and nothing else") {
    CHECK(is_nonsecure(u8{0b010}));
    CHECK_FALSE(is_nonsecure(u8{0b000}));
    CHECK_FALSE(is_nonsecure(u8{0b101}));
    for (u8 bits = 0; bits < 8; ++bits) {
        CHECK(is_nonsecure(bits) == ((bits & 2) != 0));
        CHECK(is_nonsecure(ProtAttr::unpack(bits)) == ((bits & 2) != 0));
    }
}

TEST_CASE("response status codes use the standard 2-bit encodings") {
    CHECK(pack(RespStatus::Okay) == 0b00);
    CHECK(pack(RespStatus::ExOkay) == 0b01);
    CHECK(pack(RespStatus::SlvErr) == 0b10);
    CHECK(pack(RespStatus::DecErr) == 0b11);
    for (u8 bits = 0; bits < 4; ++bits) {
        CHECK(pack(unpack_resp(bits)) == bits);
    }
}

TEST_CASE("response classification") {
    CHECK(classify_response(RespStatus::SlvErr) == ResponseClass::Error);
    CHECK(classify_response(RespStatus::DecErr) == ResponseClass::Error);
    CHECK(classify_response(RespStatus::Okay) == ResponseClass::Ok);
    CHECK(classify_response(RespStatus::ExOkay) == ResponseClass::Ok);
    CHECK(is_error(RespStatus::SlvErr));
    CHECK(is_error(RespStatus::DecErr));
    CHECK_FALSE(is_error(RespStatus::Okay));
    CHECK_FALSE(is_error(RespStatus::ExOkay));
}

TEST_CASE("handshake transfers only when valid and ready") {
    CHECK(handshake_transfer(true, true));
    CHECK_FALSE(handshake_transfer(true, false));
    CHECK_FALSE(handshake_transfer(false, true));
    CHECK_FALSE(handshake_transfer(false, false));
}

TEST_CASE("transactions require word-aligned addresses") {
    MasterTag cpu{0x0003, std::nullopt};
    Transaction r = make_read(0x40000010, ProtAttr{}, 0, cpu);
    CHECK(r.payload.empty());
    Transaction w = make_write(0x40000014, 0xdeadbeef, ProtAttr{}, 0, cpu);
    CHECK(w.payload.size() == 1);
    CHECK_THROWS_AS(make_read(0x40000001, ProtAttr{}, 0, cpu), BuildError);
    CHECK_THROWS_AS(make_write(0x40000002, 0, ProtAttr{}, 0, cpu), BuildError);
}

TEST_CASE("address decode hits, misses and honors the inclusive limit") {
    AddressMap map({{0, 0x40000000, 0x40000FFF}});
    CHECK(map.decode(0x40000010) == 0u);
    CHECK_FALSE(map.decode(0x90000000).has_value());
    CHECK(map.decode(0x40000FFF) == 0u);  // the limit itself belongs
    CHECK_FALSE(map.decode(0x40001000).has_value());
    CHECK_FALSE(map.decode(0x3FFFFFFF).has_value());
}

TEST_CASE("address map rejects malformed range sets") {
    CHECK_THROWS_AS(AddressMap({{0, 0x2000, 0x1000}}), BuildError);
    CHECK_THROWS_AS(
        AddressMap({{0, 0x1000, 0x1FFF}, {1, 0x1800, 0x27FF}}), BuildError);
    // touching but not overlapping is fine
    CHECK_NOTHROW(AddressMap({{0, 0x1000, 0x1FFF}, {1, 0x2000, 0x2FFF}}));
}

TEST_CASE("decode agrees with a linear scan on randomized maps") {
    std::mt19937_64 rng(0x5eed);
    for (int iter = 0; iter < 200; ++iter) {
        // Build disjoint ranges by slicing a strip of the address space.
        std::vector<AddressMap::Entry> entries;
        u32 cursor = static_cast<u32>(rng() % 0x1000) * 4;
        int count = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < count; ++i) {
            u32 size = (1 + static_cast<u32>(rng() % 64)) * 4;
            u32 gap = static_cast<u32>(rng() % 64) * 4;
            entries.push_back({static_cast<u32>(i), cursor, cursor + size - 1});
            cursor += size + gap;
        }
        AddressMap map(entries);
        for (int probe = 0; probe < 64; ++probe) {
            u32 addr = static_cast<u32>(rng() % (cursor + 0x100));
            std::optional<u32> expected;
            int hits = 0;
            for (const auto& e : entries) {
                if (addr >= e.base && addr <= e.limit) {
                    expected = e.slave_id;
                    ++hits;
                }
            }
            CHECK(hits <= 1);  // at most one owner by construction
            CHECK(map.decode(addr) == expected);
        }
    }
}
