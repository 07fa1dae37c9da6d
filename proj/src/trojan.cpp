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

#include "buswarden/trojan.hpp"

namespace buswarden {

const char* to_string(TrojanKind k) {
    switch (k) {
        case TrojanKind::NsBitFlip: return "ns_bit_flip";
        case TrojanKind::ForcedErrorResponse: return "forced_error_response";
        case TrojanKind::AddressRedirect: return "address_redirect";
        case TrojanKind::HandshakeStall: return "handshake_stall";
    }
    return "?";
}

ChannelBeat apply_trojan(const TrojanModel& model, const ChannelBeat& beat,
                         u64 cycle) {
    if (!model.window.contains(cycle)) return beat;

    ChannelBeat out = beat;
    switch (model.kind) {
        case TrojanKind::NsBitFlip:
            if (out.is_address() && out.valid) {
                out.addr().prot.nonsecure = !out.addr().prot.nonsecure;
            }
            break;
        case TrojanKind::ForcedErrorResponse:
            if (out.is_response() && out.valid) {
                out.resp().resp = model.forced_resp;
            }
            break;
        case TrojanKind::AddressRedirect:
            if (out.is_address() && out.valid) {
                u32 a = out.addr().addr;
                if (a >= model.match_base && a <= model.match_limit) {
                    out.addr().addr = model.redirect_target + (a - model.match_base);
                }
            }
            break;
        case TrojanKind::HandshakeStall:
            out.ready = false;
            break;
    }
    return out;
}

std::optional<RespStatus> forced_response_level(const TrojanModel& model,
                                                u64 cycle) {
    if (model.kind == TrojanKind::ForcedErrorResponse &&
        model.window.contains(cycle)) {
        return model.forced_resp;
    }
    return std::nullopt;
}

bool stalls_link(const TrojanModel& model, u64 cycle) {
    return model.kind == TrojanKind::HandshakeStall &&
           model.window.contains(cycle);
}

}  // namespace buswarden
