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

#include <string_view>

#include "buswarden/bus.hpp"
#include "buswarden/policy_lang.hpp"

namespace buswarden {

// Interpretive reference evaluators. These deliberately re-derive access
// verdicts from the policy description instead of going through the engine's
// table pipeline, so trace audits and equivalence tests have an independent
// second opinion. Keep them free of spe.hpp decision code.

/// Evaluates one access directly against the rules of a policy source.
/// Unknown masters, unknown slaves and uncovered registers are denied.
bool rules_allow(const PolicySpec& spec, u16 user_id, std::string_view slave,
                 u32 reg, Direction dir, u8 prot, u8 qos);

/// Evaluates one access by walking a raw table image: scans the device words
/// for the master, then checks the policy word at base + reg. The bit fields
/// are decoded inline.
bool image_allows(const TableImage& image, u32 regs, u16 user_id, u32 reg,
                  Direction dir, u8 prot, u8 qos);

}  // namespace buswarden
