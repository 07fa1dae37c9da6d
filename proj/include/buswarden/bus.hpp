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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace buswarden {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

/// Thrown when a model object is constructed from inconsistent inputs.
struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Protection attributes (AxPROT)
// ---------------------------------------------------------------------------

/// 3-bit transaction protection attributes. Bit 0 marks a privileged access,
/// bit 1 is the non-secure (NS) bit, bit 2 marks an instruction fetch. Only
/// the NS bit participates in security classification.
struct ProtAttr {
    bool privileged = false;
    bool nonsecure = false;
    bool instruction = false;

    constexpr u8 pack() const {
        return static_cast<u8>((privileged ? 1u : 0u) | (nonsecure ? 2u : 0u) |
                               (instruction ? 4u : 0u));
    }

    static constexpr ProtAttr unpack(u8 bits) {
        return ProtAttr{(bits & 1u) != 0, (bits & 2u) != 0, (bits & 4u) != 0};
    }

    constexpr bool operator==(const ProtAttr&) const = default;
};

/// NS bit of the packed attribute word (bit 1).
constexpr bool is_nonsecure(u8 packed_prot) { return (packed_prot & 2u) != 0; }
constexpr bool is_nonsecure(ProtAttr prot) { return prot.nonsecure; }

// ---------------------------------------------------------------------------
// Response status (xRESP)
// ---------------------------------------------------------------------------

/// 2-bit response status codes, with the standard AXI encodings.
enum class RespStatus : u8 {
    Okay = 0b00,
    ExOkay = 0b01,
    SlvErr = 0b10,
    DecErr = 0b11,
};

constexpr u8 pack(RespStatus r) { return static_cast<u8>(r); }

constexpr RespStatus unpack_resp(u8 bits) {
    return static_cast<RespStatus>(bits & 0b11u);
}

constexpr bool is_error(RespStatus r) {
    return r == RespStatus::SlvErr || r == RespStatus::DecErr;
}

enum class ResponseClass : u8 { Ok, Error };

/// Folds the four status codes into success or failure as seen by a master.
constexpr ResponseClass classify_response(RespStatus r) {
    return is_error(r) ? ResponseClass::Error : ResponseClass::Ok;
}

const char* to_string(RespStatus r);
std::optional<RespStatus> resp_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Master identity
// ---------------------------------------------------------------------------

/// Sideband identity of a bus master. Security decisions key on the AxUSER
/// value only; the interconnect-generated AxID is carried for completeness
/// and never consulted. user_id 0 is reserved for "unidentified" and is never
/// accepted as a trusted identity.
struct MasterTag {
    u16 user_id = 0;
    std::optional<u32> legacy_id;
};

constexpr u16 kUnidentifiedUser = 0;

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

enum class Direction : u8 { Read, Write };

constexpr const char* to_string(Direction d) {
    return d == Direction::Read ? "read" : "write";
}

/// One single-beat bus access as issued by a master.
struct Transaction {
    Direction direction = Direction::Read;
    u32 address = 0;
    ProtAttr prot;
    u8 qos = 0;  // 4-bit
    MasterTag master;
    std::vector<u32> payload;  // write data; empty for reads
};

/// Builds a read transaction. Throws BuildError on an unaligned address.
Transaction make_read(u32 address, ProtAttr prot, u8 qos, MasterTag master);

/// Builds a single-word write transaction. Throws BuildError on an unaligned
/// address.
Transaction make_write(u32 address, u32 data, ProtAttr prot, u8 qos,
                       MasterTag master);

// ---------------------------------------------------------------------------
// Channel beats
// ---------------------------------------------------------------------------

enum class Channel : u8 { AW, W, B, AR, R };

const char* to_string(Channel c);

/// A beat moves between two components only when the sender's VALID and the
/// receiver's READY are asserted in the same cycle.
constexpr bool handshake_transfer(bool valid, bool ready) {
    return valid && ready;
}

struct AddrSignals {
    u32 addr = 0;
    ProtAttr prot;
    u8 qos = 0;
    u16 user = 0;

    constexpr bool operator==(const AddrSignals&) const = default;
};

struct DataSignals {
    u32 data = 0;
    u16 user = 0;

    constexpr bool operator==(const DataSignals&) const = default;
};

struct RespSignals {
    RespStatus resp = RespStatus::Okay;
    u32 data = 0;  // read data on R; unused on B
    u16 user = 0;

    constexpr bool operator==(const RespSignals&) const = default;
};

/// Per-cycle snapshot of one channel of one link.
struct ChannelBeat {
    Channel channel = Channel::AW;
    bool valid = false;
    bool ready = false;
    std::variant<AddrSignals, DataSignals, RespSignals> signals;

    const AddrSignals& addr() const { return std::get<AddrSignals>(signals); }
    AddrSignals& addr() { return std::get<AddrSignals>(signals); }
    const DataSignals& data() const { return std::get<DataSignals>(signals); }
    const RespSignals& resp() const { return std::get<RespSignals>(signals); }
    RespSignals& resp() { return std::get<RespSignals>(signals); }

    bool operator==(const ChannelBeat&) const = default;

    bool is_address() const {
        return channel == Channel::AW || channel == Channel::AR;
    }
    bool is_response() const {
        return channel == Channel::B || channel == Channel::R;
    }
};

ChannelBeat make_addr_beat(Channel c, u32 addr, ProtAttr prot, u8 qos, u16 user);
ChannelBeat make_data_beat(u32 data, u16 user);
ChannelBeat make_resp_beat(Channel c, RespStatus resp, u32 data, u16 user);

// ---------------------------------------------------------------------------
// Address decode
// ---------------------------------------------------------------------------

/// Ordered map of non-overlapping [base, limit] windows to slave ids.
/// Addresses that fall outside every window decode to nothing, which the
/// interconnect surfaces as DECERR.
class AddressMap {
public:
    struct Entry {
        u32 slave_id = 0;
        u32 base = 0;
        u32 limit = 0;  // inclusive
    };

    AddressMap() = default;

    /// Throws BuildError if any entry has base > limit or ranges overlap.
    explicit AddressMap(std::vector<Entry> entries);

    /// Slave owning addr, or nullopt on a decode miss.
    std::optional<u32> decode(u32 addr) const;

    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;  // sorted by base
};

}  // namespace buswarden
