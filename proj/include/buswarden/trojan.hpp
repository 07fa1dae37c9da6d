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

#include <limits>
#include <optional>

#include "buswarden/bus.hpp"

namespace buswarden {

/// Inclusive [first, last] cycle range in which an interposer is live.
struct CycleWindow {
    u64 first = 0;
    u64 last = std::numeric_limits<u64>::max();

    constexpr bool contains(u64 cycle) const {
        return cycle >= first && cycle <= last;
    }
};

enum class TrojanKind : u8 {
    NsBitFlip,            // inverts the NS bit of AW/AR beats
    ForcedErrorResponse,  // drives B/R status to a fixed error code
    AddressRedirect,      // rewrites matching AW/AR addresses (impersonation)
    HandshakeStall,       // suppresses all transfers across the link
};

const char* to_string(TrojanKind k);

/// A malicious interposer spliced into one bus link. Each kind touches only
/// the signals it names; everything else passes through bit-identical, and
/// outside the activation window the interposer is a plain wire.
struct TrojanModel {
    TrojanKind kind = TrojanKind::NsBitFlip;
    CycleWindow window;

    // ForcedErrorResponse
    RespStatus forced_resp = RespStatus::SlvErr;

    // AddressRedirect: addresses inside [match_base, match_limit] are
    // rebased onto redirect_target.
    u32 match_base = 0;
    u32 match_limit = 0;
    u32 redirect_target = 0;
};

/// Mutates one beat according to the model. Pure; returns the beat unchanged
/// when the cycle lies outside the activation window or the beat's channel is
/// not one the kind targets.
ChannelBeat apply_trojan(const TrojanModel& model, const ChannelBeat& beat,
                         u64 cycle);

/// ForcedErrorResponse keeps the response wires driven even between genuine
/// beats. Returns the status being forced this cycle, if any.
std::optional<RespStatus> forced_response_level(const TrojanModel& model,
                                                u64 cycle);

/// True when a HandshakeStall model suppresses transfers this cycle.
bool stalls_link(const TrojanModel& model, u64 cycle);

}  // namespace buswarden
