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

#include "buswarden/sck.hpp"

namespace buswarden {

SanityChecker::ConfigResult SanityChecker::write_control(u32 word) {
    bool enable = (word & 1u) != 0;
    if (!enable) {
        // Explicit reset path: clears the latch and rearms the timer.
        enabled_ = false;
        phase_ = Phase::Normal;
        attack_latched_ = false;
        reported_cycle_.reset();
        timer_ = reload_;
        return ConfigResult::Ok;
    }
    enabled_ = true;
    return ConfigResult::Ok;
}

SanityChecker::ConfigResult SanityChecker::write_reload(u32 word) {
    if (word == 0) return ConfigResult::SlvErr;
    reload_ = word;
    if (phase_ == Phase::Normal) timer_ = reload_;
    return ConfigResult::Ok;
}

SanityChecker::ConfigResult SanityChecker::configure(u32 offset, u32 word) {
    switch (offset) {
        case kControlOffset: return write_control(word);
        case kReloadOffset: return write_reload(word);
        default: return ConfigResult::SlvErr;  // STATUS is read-only
    }
}

std::optional<u32> SanityChecker::read_register(u32 offset) const {
    switch (offset) {
        case kControlOffset: return enabled_ ? 1u : 0u;
        case kReloadOffset: return reload_;
        case kStatusOffset: return status_word();
        default: return std::nullopt;
    }
}

u32 SanityChecker::status_word() const {
    u32 word = attack_latched_ ? 1u : 0u;
    if (reported_cycle_) {
        word |= static_cast<u32>((*reported_cycle_ & 0xFFFFFFu) << 8);
    }
    return word;
}

std::optional<SecurityEvent> SanityChecker::step(bool resp_error_asserted,
                                                 u64 cycle) {
    if (!enabled_) return std::nullopt;

    switch (phase_) {
        case Phase::Normal:
            if (resp_error_asserted) {
                phase_ = Phase::Detection;
                timer_ = reload_;
            }
            break;
        case Phase::Detection:
            if (!resp_error_asserted) {
                phase_ = Phase::Normal;
                timer_ = reload_;
                break;
            }
            timer_ -= 1;
            if (timer_ == 0) {
                phase_ = Phase::Attack;
                attack_latched_ = true;
                reported_cycle_ = cycle;
                SecurityEvent ev;
                ev.kind = EventKind::BusTamper;
                ev.source = EventSource::SCK;
                ev.master = host_;
                ev.cycle = cycle;
                return ev;
            }
            break;
        case Phase::Attack:
            // Absorbing; a single report per latch.
            break;
    }
    return std::nullopt;
}

}  // namespace buswarden
