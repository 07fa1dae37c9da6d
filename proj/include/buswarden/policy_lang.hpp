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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buswarden/bus.hpp"
#include "buswarden/spe.hpp"

namespace buswarden {

// ---------------------------------------------------------------------------
// Policy source language
// ---------------------------------------------------------------------------
//
// Line-oriented, '#' starts a comment:
//
//   master <name> id=<id>
//   slave <name> base=<addr> regs=<n>
//   allow <master> <slave> regs=<a>..<b> perm=<r|w|rw> [prot=<bbb>/<bbb>] [qos<=<n>]
//
// Numbers accept 0x-prefixed hex or decimal; prot values are exactly three
// binary digits (value/mask). Omitted prot leaves attributes unconstrained,
// omitted qos allows the full 0..15 range.

struct MasterDecl {
    std::string name;
    u16 user_id = 0;
    int line = 0;
};

struct SlaveDecl {
    std::string name;
    u32 base = 0;
    u32 regs = 0;
    int line = 0;
};

struct PolicyRule {
    std::string master;
    std::string slave;
    u32 reg_lo = 0;
    u32 reg_hi = 0;  // inclusive
    bool read_allowed = false;
    bool write_allowed = false;
    u8 required_prot = 0;
    u8 prot_mask = 0;
    u8 qos_max = 15;
    int line = 0;
};

struct PolicySpec {
    std::vector<MasterDecl> masters;
    std::vector<SlaveDecl> slaves;
    std::vector<PolicyRule> rules;

    const MasterDecl* master_named(std::string_view name) const;
    const SlaveDecl* slave_named(std::string_view name) const;
    const MasterDecl* master_with_id(u16 user_id) const;
};

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
    std::vector<std::string> expected;  // candidate tokens, when known

    std::string format() const;
};

struct ParseResult {
    std::optional<PolicySpec> spec;  // set iff errors is empty
    std::vector<Diagnostic> errors;
};

ParseResult parse_policy(std::string_view text);

/// Semantic checks beyond the grammar: rule references resolve, register
/// ranges fit the slave, no overlapping rules for a (master, slave) pair,
/// ids and QoS ceilings in range. Empty result means the spec is sound.
std::vector<Diagnostic> validate(const PolicySpec& spec);

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

/// Raw table memories for one policy engine, plus the framing header fields.
struct TableImage {
    u32 version = 1;
    std::vector<u32> device_words;
    std::vector<u32> policy_words;

    bool operator==(const TableImage&) const = default;
};

/// Compiled tables for one guarded slave.
struct CompiledSlavePolicy {
    std::string slave;
    u32 base = 0;
    u32 regs = 0;
    TableImage image;
};

/// Compiles a validated spec into per-slave table images. The layout is
/// deterministic: every declared master gets a device entry in declaration
/// order with a policy span of `regs` words, and registers no rule covers
/// compile to the all-deny entry (word 0).
std::vector<CompiledSlavePolicy> compile(const PolicySpec& spec);

const CompiledSlavePolicy* find_compiled(
    const std::vector<CompiledSlavePolicy>& compiled, std::string_view slave);

// ---------------------------------------------------------------------------
// Image files
// ---------------------------------------------------------------------------
//
// Byte layout: magic "SPE1", u32 version, u32 device word count, u32 policy
// word count, then the words, all little-endian.

enum class ImageErrorKind : u8 { BadMagic, Truncated, VersionMismatch };

const char* to_string(ImageErrorKind k);

struct ImageReadResult {
    std::optional<TableImage> image;
    std::optional<ImageErrorKind> error;
};

std::vector<std::uint8_t> serialize(const TableImage& image);
ImageReadResult deserialize(std::span<const std::uint8_t> bytes);

}  // namespace buswarden
