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

#include "buswarden/rule_eval.hpp"

namespace buswarden {

bool rules_allow(const PolicySpec& spec, u16 user_id, std::string_view slave,
                 u32 reg, Direction dir, u8 prot, u8 qos) {
    if (user_id == kUnidentifiedUser) return false;
    const MasterDecl* master = spec.master_with_id(user_id);
    if (!master) return false;
    const SlaveDecl* s = spec.slave_named(slave);
    if (!s || reg >= s->regs) return false;
    for (const auto& rule : spec.rules) {
        if (rule.master != master->name || rule.slave != slave) continue;
        if (reg < rule.reg_lo || reg > rule.reg_hi) continue;
        if (dir == Direction::Read ? !rule.read_allowed : !rule.write_allowed) {
            return false;
        }
        if ((prot & rule.prot_mask) != (rule.required_prot & rule.prot_mask)) {
            return false;
        }
        if (qos > rule.qos_max) return false;
        return true;
    }
    return false;  // no rule covers the register
}

bool image_allows(const TableImage& image, u32 regs, u16 user_id, u32 reg,
                  Direction dir, u8 prot, u8 qos) {
    if (user_id == 0) return false;
    if (reg >= regs) return false;
    for (u32 word : image.device_words) {
        if ((word & 0xFFFFu) != user_id) continue;
        u32 base = word >> 16;
        u64 index = static_cast<u64>(base) + reg;
        if (index >= image.policy_words.size()) return false;
        u32 entry = image.policy_words[index];
        bool permitted = dir == Direction::Read ? (entry & 1u) : (entry & 2u);
        if (!permitted) return false;
        u8 required = static_cast<u8>((entry >> 2) & 0x7u);
        u8 mask = static_cast<u8>((entry >> 5) & 0x7u);
        if ((prot & mask) != (required & mask)) return false;
        u8 qos_max = static_cast<u8>((entry >> 8) & 0xFu);
        if (qos > qos_max) return false;
        return true;
    }
    return false;  // master absent from the device table
}

}  // namespace buswarden
