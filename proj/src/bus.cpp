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

#include "buswarden/bus.hpp"

#include <algorithm>

namespace buswarden {

const char* to_string(RespStatus r) {
    switch (r) {
        case RespStatus::Okay: return "OKAY";
        case RespStatus::ExOkay: return "EXOKAY";
        case RespStatus::SlvErr: return "SLVERR";
        case RespStatus::DecErr: return "DECERR";
    }
    return "?";
}

std::optional<RespStatus> resp_from_string(const std::string& name) {
    if (name == "OKAY") return RespStatus::Okay;
    if (name == "EXOKAY") return RespStatus::ExOkay;
    if (name == "SLVERR") return RespStatus::SlvErr;
    if (name == "DECERR") return RespStatus::DecErr;
    return std::nullopt;
}

const char* to_string(Channel c) {
    switch (c) {
        case Channel::AW: return "AW";
        case Channel::W: return "W";
        case Channel::B: return "B";
        case Channel::AR: return "AR";
        case Channel::R: return "R";
    }
    return "?";
}

namespace {

void check_aligned(u32 address) {
    if (address % 4 != 0) {
        throw BuildError("transaction address 0x" + std::to_string(address) +
                         " is not word aligned");
    }
}

}  // namespace

Transaction make_read(u32 address, ProtAttr prot, u8 qos, MasterTag master) {
    check_aligned(address);
    return Transaction{Direction::Read, address, prot, qos, master, {}};
}

Transaction make_write(u32 address, u32 data, ProtAttr prot, u8 qos,
                       MasterTag master) {
    check_aligned(address);
    return Transaction{Direction::Write, address, prot, qos, master, {data}};
}

ChannelBeat make_addr_beat(Channel c, u32 addr, ProtAttr prot, u8 qos,
                           u16 user) {
    ChannelBeat beat;
    beat.channel = c;
    beat.valid = true;
    beat.signals = AddrSignals{addr, prot, qos, user};
    return beat;
}

ChannelBeat make_data_beat(u32 data, u16 user) {
    ChannelBeat beat;
    beat.channel = Channel::W;
    beat.valid = true;
    beat.signals = DataSignals{data, user};
    return beat;
}

ChannelBeat make_resp_beat(Channel c, RespStatus resp, u32 data, u16 user) {
    ChannelBeat beat;
    beat.channel = c;
    beat.valid = true;
    beat.signals = RespSignals{resp, data, user};
    return beat;
}

AddressMap::AddressMap(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.base < b.base; });
    for (size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (e.base > e.limit) {
            throw BuildError("address map entry for slave " +
                             std::to_string(e.slave_id) + " has base > limit");
        }
        if (i > 0 && entries_[i - 1].limit >= e.base) {
            throw BuildError("address map ranges overlap between slaves " +
                             std::to_string(entries_[i - 1].slave_id) + " and " +
                             std::to_string(e.slave_id));
        }
    }
}

std::optional<u32> AddressMap::decode(u32 addr) const {
    // Entries are sorted by base: binary search for the last base <= addr.
    auto it = std::upper_bound(
        entries_.begin(), entries_.end(), addr,
        [](u32 a, const Entry& e) { return a < e.base; });
    if (it == entries_.begin()) return std::nullopt;
    --it;
    if (addr >= it->base && addr <= it->limit) return it->slave_id;
    return std::nullopt;
}

}  // namespace buswarden
