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

#include "buswarden/policy_lang.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <sstream>

namespace buswarden {

const MasterDecl* PolicySpec::master_named(std::string_view name) const {
    for (const auto& m : masters) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

const SlaveDecl* PolicySpec::slave_named(std::string_view name) const {
    for (const auto& s : slaves) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const MasterDecl* PolicySpec::master_with_id(u16 user_id) const {
    for (const auto& m : masters) {
        if (m.user_id == user_id) return &m;
    }
    return nullptr;
}

std::string Diagnostic::format() const {
    std::ostringstream os;
    os << "line " << line << ":" << column << ": " << message;
    if (!expected.empty()) {
        os << " (expected ";
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) os << " | ";
            os << expected[i];
        }
        os << ")";
    }
    return os.str();
}

namespace {

struct Token {
    std::string text;
    int column = 0;  // 1-based
};

std::vector<Token> tokenize_line(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#') {
            ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start + 1)});
    }
    return out;
}

std::optional<u64> parse_number(const std::string& text) {
    if (text.empty()) return std::nullopt;
    u64 value = 0;
    size_t pos = 0;
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        base = 16;
        pos = 2;
    }
    if (pos >= text.size()) return std::nullopt;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (base == 16 && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else return std::nullopt;
        value = value * base + static_cast<u64>(digit);
        if (value > 0xFFFFFFFFull) return std::nullopt;
    }
    return value;
}

std::optional<u8> parse_prot_bits(const std::string& text) {
    if (text.size() != 3) return std::nullopt;
    u8 value = 0;
    for (char c : text) {
        if (c != '0' && c != '1') return std::nullopt;
        value = static_cast<u8>((value << 1) | (c == '1' ? 1 : 0));
    }
    return value;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ParseResult run() {
        std::istringstream in{std::string(text_)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto tokens = tokenize_line(line);
            if (tokens.empty()) continue;
            parse_statement(tokens, lineno);
        }
        ParseResult result;
        if (errors_.empty()) {
            if (spec_.masters.empty() && spec_.slaves.empty() &&
                spec_.rules.empty()) {
                error(1, 1, "empty input, expected declaration",
                      {"master", "slave", "allow"});
                result.errors = errors_;
                return result;
            }
            result.spec = std::move(spec_);
        }
        result.errors = errors_;
        return result;
    }

private:
    std::string_view text_;
    PolicySpec spec_;
    std::vector<Diagnostic> errors_;

    void error(int line, int col, std::string message,
               std::vector<std::string> expected = {}) {
        errors_.push_back({line, col, std::move(message), std::move(expected)});
    }

    // key=value field; returns the value part or nothing with an error.
    std::optional<std::string> field(const Token& tok, const std::string& key,
                                     int line) {
        std::string prefix = key + "=";
        if (tok.text.rfind(prefix, 0) != 0) {
            error(line, tok.column, "unrecognized field '" + tok.text + "'",
                  {prefix + "..."});
            return std::nullopt;
        }
        return tok.text.substr(prefix.size());
    }

    void parse_statement(const std::vector<Token>& tokens, int line) {
        const std::string& head = tokens[0].text;
        if (head == "master") {
            parse_master(tokens, line);
        } else if (head == "slave") {
            parse_slave(tokens, line);
        } else if (head == "allow") {
            parse_rule(tokens, line);
        } else {
            error(line, tokens[0].column, "unknown declaration '" + head + "'",
                  {"master", "slave", "allow"});
        }
    }

    void parse_master(const std::vector<Token>& tokens, int line) {
        if (tokens.size() != 3) {
            error(line, tokens[0].column, "malformed master declaration",
                  {"master <name> id=<id>"});
            return;
        }
        MasterDecl decl;
        decl.name = tokens[1].text;
        decl.line = line;
        auto value = field(tokens[2], "id", line);
        if (!value) return;
        auto id = parse_number(*value);
        if (!id || *id > 0xFFFF) {
            error(line, tokens[2].column, "master id must be a 16-bit number");
            return;
        }
        decl.user_id = static_cast<u16>(*id);
        if (spec_.master_named(decl.name) || spec_.slave_named(decl.name)) {
            error(line, tokens[1].column, "duplicate name '" + decl.name + "'");
            return;
        }
        spec_.masters.push_back(std::move(decl));
    }

    void parse_slave(const std::vector<Token>& tokens, int line) {
        if (tokens.size() != 4) {
            error(line, tokens[0].column, "malformed slave declaration",
                  {"slave <name> base=<addr> regs=<n>"});
            return;
        }
        SlaveDecl decl;
        decl.name = tokens[1].text;
        decl.line = line;
        auto base = field(tokens[2], "base", line);
        if (!base) return;
        auto base_val = parse_number(*base);
        if (!base_val) {
            error(line, tokens[2].column, "bad base address");
            return;
        }
        decl.base = static_cast<u32>(*base_val);
        auto regs = field(tokens[3], "regs", line);
        if (!regs) return;
        auto regs_val = parse_number(*regs);
        if (!regs_val || *regs_val == 0) {
            error(line, tokens[3].column, "regs must be a positive count");
            return;
        }
        decl.regs = static_cast<u32>(*regs_val);
        if (spec_.master_named(decl.name) || spec_.slave_named(decl.name)) {
            error(line, tokens[1].column, "duplicate name '" + decl.name + "'");
            return;
        }
        spec_.slaves.push_back(std::move(decl));
    }

    void parse_rule(const std::vector<Token>& tokens, int line) {
        if (tokens.size() < 5) {
            error(line, tokens[0].column, "malformed rule",
                  {"allow <master> <slave> regs=<a>..<b> perm=<r|w|rw>"});
            return;
        }
        PolicyRule rule;
        rule.master = tokens[1].text;
        rule.slave = tokens[2].text;
        rule.line = line;

        auto range = field(tokens[3], "regs", line);
        if (!range) return;
        auto dots = range->find("..");
        if (dots == std::string::npos) {
            error(line, tokens[3].column, "register range must be <a>..<b>");
            return;
        }
        auto lo = parse_number(range->substr(0, dots));
        auto hi = parse_number(range->substr(dots + 2));
        if (!lo || !hi) {
            error(line, tokens[3].column, "bad register range bounds");
            return;
        }
        rule.reg_lo = static_cast<u32>(*lo);
        rule.reg_hi = static_cast<u32>(*hi);

        auto perm = field(tokens[4], "perm", line);
        if (!perm) return;
        if (perm->empty() || perm->find_first_not_of("rw") != std::string::npos) {
            error(line, tokens[4].column, "perm must be r, w or rw");
            return;
        }
        rule.read_allowed = perm->find('r') != std::string::npos;
        rule.write_allowed = perm->find('w') != std::string::npos;

        for (size_t i = 5; i < tokens.size(); ++i) {
            const Token& tok = tokens[i];
            if (tok.text.rfind("prot=", 0) == 0) {
                std::string value = tok.text.substr(5);
                auto slash = value.find('/');
                if (slash == std::string::npos) {
                    error(line, tok.column, "prot must be <bits>/<mask>");
                    return;
                }
                auto bits = parse_prot_bits(value.substr(0, slash));
                auto mask = parse_prot_bits(value.substr(slash + 1));
                if (!bits || !mask) {
                    error(line, tok.column,
                          "prot value and mask must be three binary digits");
                    return;
                }
                rule.required_prot = *bits;
                rule.prot_mask = *mask;
            } else if (tok.text.rfind("qos<=", 0) == 0) {
                auto qos = parse_number(tok.text.substr(5));
                if (!qos) {
                    error(line, tok.column, "bad qos ceiling");
                    return;
                }
                // Values above 15 survive clamped so validate can flag them.
                rule.qos_max = static_cast<u8>(std::min<u64>(*qos, 0xFF));
            } else {
                error(line, tok.column, "unrecognized rule field '" + tok.text + "'",
                      {"prot=<bits>/<mask>", "qos<=<n>"});
                return;
            }
        }
        spec_.rules.push_back(std::move(rule));
    }
};

}  // namespace

ParseResult parse_policy(std::string_view text) { return Parser(text).run(); }

std::vector<Diagnostic> validate(const PolicySpec& spec) {
    std::vector<Diagnostic> diags;
    auto diag = [&diags](int line, std::string msg) {
        diags.push_back({line, 1, std::move(msg), {}});
    };

    for (const auto& m : spec.masters) {
        if (m.user_id == kUnidentifiedUser) {
            diag(m.line, "master '" + m.name + "' uses the reserved unidentified id 0");
        }
        for (const auto& other : spec.masters) {
            if (&other != &m && other.user_id == m.user_id &&
                other.line > m.line) {
                diag(other.line, "masters '" + m.name + "' and '" + other.name +
                                     "' share user id");
            }
        }
    }
    for (const auto& s : spec.slaves) {
        if (s.base % 4 != 0) {
            diag(s.line, "slave '" + s.name + "' base is not word aligned");
        }
    }

    for (const auto& r : spec.rules) {
        const MasterDecl* m = spec.master_named(r.master);
        const SlaveDecl* s = spec.slave_named(r.slave);
        if (!m) {
            diag(r.line, "rule references undeclared master '" + r.master + "'");
        }
        if (!s) {
            diag(r.line, "rule references undeclared slave '" + r.slave + "'");
        }
        if (r.reg_lo > r.reg_hi) {
            diag(r.line, "register range is inverted");
        }
        if (s && r.reg_hi >= s->regs) {
            diag(r.line, "register range exceeds slave '" + s->name + "' (" +
                             std::to_string(s->regs) + " registers)");
        }
        if (r.qos_max > 15) {
            diag(r.line, "qos ceiling above 15");
        }
    }

    // Overlap detection per (master, slave) pair.
    for (size_t i = 0; i < spec.rules.size(); ++i) {
        for (size_t j = i + 1; j < spec.rules.size(); ++j) {
            const auto& a = spec.rules[i];
            const auto& b = spec.rules[j];
            if (a.master == b.master && a.slave == b.slave &&
                a.reg_lo <= b.reg_hi && b.reg_lo <= a.reg_hi) {
                diag(b.line, "rule overlaps an earlier rule for (" + a.master +
                                 ", " + a.slave + ")");
            }
        }
    }
    return diags;
}

std::vector<CompiledSlavePolicy> compile(const PolicySpec& spec) {
    std::vector<CompiledSlavePolicy> out;
    out.reserve(spec.slaves.size());
    for (const auto& slave : spec.slaves) {
        CompiledSlavePolicy c;
        c.slave = slave.name;
        c.base = slave.base;
        c.regs = slave.regs;
        c.image.version = 1;
        c.image.policy_words.assign(
            static_cast<size_t>(spec.masters.size()) * slave.regs, 0u);
        for (size_t mi = 0; mi < spec.masters.size(); ++mi) {
            const auto& master = spec.masters[mi];
            u16 policy_base = static_cast<u16>(mi * slave.regs);
            c.image.device_words.push_back(
                pack_device_word(master.user_id, policy_base));
            for (const auto& rule : spec.rules) {
                if (rule.master != master.name || rule.slave != slave.name) {
                    continue;
                }
                PolicyEntry entry;
                entry.read_allowed = rule.read_allowed;
                entry.write_allowed = rule.write_allowed;
                entry.required_prot = rule.required_prot;
                entry.prot_mask = rule.prot_mask;
                entry.qos_max = rule.qos_max;
                u32 word = pack_policy_entry(entry);
                for (u32 reg = rule.reg_lo; reg <= rule.reg_hi; ++reg) {
                    c.image.policy_words[policy_base + reg] = word;
                }
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

const CompiledSlavePolicy* find_compiled(
    const std::vector<CompiledSlavePolicy>& compiled, std::string_view slave) {
    for (const auto& c : compiled) {
        if (c.slave == slave) return &c;
    }
    return nullptr;
}

const char* to_string(ImageErrorKind k) {
    switch (k) {
        case ImageErrorKind::BadMagic: return "bad magic";
        case ImageErrorKind::Truncated: return "truncated";
        case ImageErrorKind::VersionMismatch: return "version mismatch";
    }
    return "?";
}

namespace {

constexpr char kMagic[4] = {'S', 'P', 'E', '1'};

void put_u32(std::vector<std::uint8_t>& out, u32 value) {
    out.push_back(static_cast<std::uint8_t>(value & 0xFF));
    out.push_back(static_cast<std::uint8_t>((value >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((value >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((value >> 24) & 0xFF));
}

std::optional<u32> get_u32(std::span<const std::uint8_t> bytes, size_t at) {
    if (at + 4 > bytes.size()) return std::nullopt;
    return static_cast<u32>(bytes[at]) | (static_cast<u32>(bytes[at + 1]) << 8) |
           (static_cast<u32>(bytes[at + 2]) << 16) |
           (static_cast<u32>(bytes[at + 3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> serialize(const TableImage& image) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + 4 * (image.device_words.size() + image.policy_words.size()));
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, image.version);
    put_u32(out, static_cast<u32>(image.device_words.size()));
    put_u32(out, static_cast<u32>(image.policy_words.size()));
    for (u32 w : image.device_words) put_u32(out, w);
    for (u32 w : image.policy_words) put_u32(out, w);
    return out;
}

ImageReadResult deserialize(std::span<const std::uint8_t> bytes) {
    ImageReadResult result;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        result.error = ImageErrorKind::BadMagic;
        return result;
    }
    auto version = get_u32(bytes, 4);
    auto device_count = get_u32(bytes, 8);
    auto policy_count = get_u32(bytes, 12);
    if (!version || !device_count || !policy_count) {
        result.error = ImageErrorKind::Truncated;
        return result;
    }
    if (*version != 1) {
        result.error = ImageErrorKind::VersionMismatch;
        return result;
    }
    TableImage image;
    image.version = *version;
    size_t at = 16;
    for (u32 i = 0; i < *device_count; ++i, at += 4) {
        auto w = get_u32(bytes, at);
        if (!w) {
            result.error = ImageErrorKind::Truncated;
            return result;
        }
        image.device_words.push_back(*w);
    }
    for (u32 i = 0; i < *policy_count; ++i, at += 4) {
        auto w = get_u32(bytes, at);
        if (!w) {
            result.error = ImageErrorKind::Truncated;
            return result;
        }
        image.policy_words.push_back(*w);
    }
    result.image = std::move(image);
    return result;
}

}  // namespace buswarden
