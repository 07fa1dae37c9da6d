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

#include "buswarden/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace buswarden {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& message) {
    throw ScenarioError(message);
}

// Accepts a JSON number or a "0x"-prefixed / decimal string.
u64 number_field(const json& j, const std::string& context) {
    if (j.is_number_unsigned()) return j.get<u64>();
    if (j.is_number_integer()) {
        auto v = j.get<long long>();
        if (v < 0) fail(context + ": negative value");
        return static_cast<u64>(v);
    }
    if (j.is_string()) {
        const std::string text = j.get<std::string>();
        try {
            size_t used = 0;
            unsigned long long v =
                std::stoull(text, &used, text.rfind("0x", 0) == 0 ? 16 : 10);
            if (used != text.size()) fail(context + ": bad number '" + text + "'");
            return v;
        } catch (const std::exception&) {
            fail(context + ": bad number '" + text + "'");
        }
    }
    fail(context + ": expected a number");
}

u64 number_or(const json& obj, const std::string& key, u64 fallback) {
    if (!obj.contains(key)) return fallback;
    return number_field(obj.at(key), key);
}

u64 require_number(const json& obj, const std::string& key,
                   const std::string& context) {
    if (!obj.contains(key)) fail(context + ": missing '" + key + "'");
    return number_field(obj.at(key), context + "." + key);
}

std::string require_string(const json& obj, const std::string& key,
                           const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        fail(context + ": missing string '" + key + "'");
    }
    return obj.at(key).get<std::string>();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PolicySpec parse_policy_or_fail(const std::string& text,
                                const std::string& origin) {
    ParseResult parsed = parse_policy(text);
    if (!parsed.spec) {
        std::string msg = "policy " + origin + " failed to parse:";
        for (const auto& d : parsed.errors) msg += "\n  " + d.format();
        fail(msg);
    }
    auto diags = validate(*parsed.spec);
    if (!diags.empty()) {
        std::string msg = "policy " + origin + " failed validation:";
        for (const auto& d : diags) msg += "\n  " + d.format();
        fail(msg);
    }
    return std::move(*parsed.spec);
}

TrojanModel parse_trojan(const json& j, u64 cycles, const std::string& context) {
    TrojanModel model;
    std::string kind = require_string(j, "kind", context);
    if (kind == "ns_bit_flip") {
        model.kind = TrojanKind::NsBitFlip;
    } else if (kind == "forced_error_response") {
        model.kind = TrojanKind::ForcedErrorResponse;
    } else if (kind == "address_redirect") {
        model.kind = TrojanKind::AddressRedirect;
    } else if (kind == "handshake_stall") {
        model.kind = TrojanKind::HandshakeStall;
    } else {
        fail(context + ": unknown trojan kind '" + kind + "'");
    }

    if (j.contains("window")) {
        const json& w = j.at("window");
        if (!w.is_array() || w.size() != 2) {
            fail(context + ": window must be [first, last]");
        }
        model.window.first = number_field(w[0], context + ".window");
        model.window.last = number_field(w[1], context + ".window");
    }
    // A stall may be given as a start plus duration instead of a window.
    if (model.kind == TrojanKind::HandshakeStall && j.contains("duration")) {
        u64 start = number_or(j, "start", model.window.first);
        u64 duration = require_number(j, "duration", context);
        if (duration == 0) fail(context + ": stall duration must be >= 1");
        model.window.first = start;
        model.window.last = start + duration - 1;
    }
    if (model.window.first > model.window.last) {
        fail(context + ": window first exceeds last");
    }
    (void)cycles;

    if (model.kind == TrojanKind::ForcedErrorResponse) {
        std::string resp = j.contains("resp")
                               ? j.at("resp").get<std::string>()
                               : std::string("SLVERR");
        auto status = resp_from_string(resp);
        if (!status || !is_error(*status)) {
            fail(context + ": resp must be SLVERR or DECERR");
        }
        model.forced_resp = *status;
    }
    if (model.kind == TrojanKind::AddressRedirect) {
        if (!j.contains("redirect")) fail(context + ": missing redirect");
        const json& r = j.at("redirect");
        if (!r.contains("match") || !r.at("match").is_array() ||
            r.at("match").size() != 2) {
            fail(context + ": redirect.match must be [base, limit]");
        }
        model.match_base =
            static_cast<u32>(number_field(r.at("match")[0], context));
        model.match_limit =
            static_cast<u32>(number_field(r.at("match")[1], context));
        if (model.match_base > model.match_limit) {
            fail(context + ": redirect.match base exceeds limit");
        }
        model.redirect_target =
            static_cast<u32>(require_number(r, "target", context));
    }
    return model;
}

}  // namespace

Topology topology_of(const ScenarioScript& script) {
    Topology topo;
    topo.masters = script.masters;
    topo.slaves = script.slaves;
    topo.interposers = script.interposers;
    topo.watchdog_horizon = script.watchdog_horizon;
    topo.spe_device_capacity = script.spe_device_capacity;
    topo.spe_policy_capacity = script.spe_policy_capacity;
    return topo;
}

ScenarioScript parse_scenario(const std::string& json_text,
                              const std::string& name,
                              const std::string& base_dir) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        fail("scenario is not a JSON object");
    }

    ScenarioScript script;
    script.name = name;

    if (require_number(root, "scenario_version", "scenario") !=
        static_cast<u64>(kScenarioVersion)) {
        fail("unsupported scenario_version");
    }
    script.cycles = require_number(root, "cycles", "scenario");
    if (script.cycles == 0) fail("cycles must be >= 1");
    script.seed = number_or(root, "seed", 0);
    script.watchdog_horizon = number_or(root, "watchdog_horizon", 64);

    if (!root.contains("topology") || !root.at("topology").is_object()) {
        fail("scenario: missing topology");
    }
    const json& topo = root.at("topology");

    std::set<std::string> names;
    if (!topo.contains("masters") || !topo.at("masters").is_array() ||
        topo.at("masters").empty()) {
        fail("topology: at least one master is required");
    }
    for (const json& m : topo.at("masters")) {
        MasterConfig cfg;
        cfg.name = require_string(m, "name", "master");
        u64 uid = require_number(m, "user_id", "master " + cfg.name);
        if (uid > 0xFFFF) fail("master " + cfg.name + ": user_id above 16 bits");
        cfg.tag.user_id = static_cast<u16>(uid);
        if (!names.insert(cfg.name).second) {
            fail("duplicate component name '" + cfg.name + "'");
        }
        script.masters.push_back(std::move(cfg));
    }

    if (!topo.contains("slaves") || !topo.at("slaves").is_array() ||
        topo.at("slaves").empty()) {
        fail("topology: at least one slave is required");
    }
    u32 next_id = 0;
    for (const json& s : topo.at("slaves")) {
        SlaveConfig cfg;
        cfg.name = require_string(s, "name", "slave");
        cfg.id = static_cast<u32>(number_or(s, "id", next_id));
        next_id = cfg.id + 1;
        cfg.base = static_cast<u32>(require_number(s, "base", "slave " + cfg.name));
        cfg.regs = static_cast<u32>(require_number(s, "regs", "slave " + cfg.name));
        cfg.latency = static_cast<u32>(number_or(s, "latency", 1));
        cfg.guarded = s.value("guarded", false);
        if (!names.insert(cfg.name).second) {
            fail("duplicate component name '" + cfg.name + "'");
        }
        script.slaves.push_back(std::move(cfg));
    }

    auto master_index = [&script](const std::string& n) -> std::optional<u32> {
        for (u32 i = 0; i < script.masters.size(); ++i) {
            if (script.masters[i].name == n) return i;
        }
        return std::nullopt;
    };
    auto slave_cfg = [&script](const std::string& n) -> const SlaveConfig* {
        for (const auto& s : script.slaves) {
            if (s.name == n) return &s;
        }
        return nullptr;
    };

    // -- knobs --
    if (root.contains("spe")) {
        const json& spe = root.at("spe");
        script.spe_enabled = spe.value("enabled", true);
        script.spe_device_capacity = static_cast<u32>(
            number_or(spe, "device_capacity", DeviceTable::kDefaultCapacity));
        script.spe_policy_capacity = static_cast<u32>(
            number_or(spe, "policy_capacity", PolicyTable::kDefaultCapacity));
    }
    if (root.contains("sck")) {
        const json& sck = root.at("sck");
        script.sck_enabled = sck.value("enabled", false);
        script.sck_reload = static_cast<u32>(number_or(sck, "reload", 16));
        if (script.sck_enabled && script.sck_reload == 0) {
            fail("sck.reload must be >= 1");
        }
    }

    // -- policy --
    bool any_guarded = false;
    for (const auto& s : script.slaves) any_guarded |= s.guarded;
    if (!root.contains("policy")) {
        fail("scenario: missing policy section");
    }
    const json& pol = root.at("policy");
    int sources = (pol.contains("source") ? 1 : 0) +
                  (pol.contains("source_inline") ? 1 : 0) +
                  (pol.contains("images") ? 1 : 0);
    if (sources != 1) {
        fail("policy: exactly one of source, source_inline or images");
    }
    if (pol.contains("source") || pol.contains("source_inline")) {
        std::string text;
        std::string origin;
        if (pol.contains("source")) {
            fs::path p = fs::path(base_dir) /
                         pol.at("source").get<std::string>();
            origin = p.string();
            text = read_file(p.string());
        } else {
            origin = "(inline)";
            text = pol.at("source_inline").get<std::string>();
        }
        PolicySpec spec = parse_policy_or_fail(text, origin);

        // Cross-check declarations against the topology.
        for (const auto& m : spec.masters) {
            if (auto mi = master_index(m.name)) {
                if (script.masters[*mi].tag.user_id != m.user_id) {
                    fail("master '" + m.name +
                         "' has different user ids in topology and policy");
                }
            }
        }
        for (const auto& s : script.slaves) {
            if (!s.guarded) continue;
            const SlaveDecl* decl = spec.slave_named(s.name);
            if (!decl) {
                fail("guarded slave '" + s.name + "' is not declared in the policy");
            }
            if (decl->base != s.base || decl->regs != s.regs) {
                fail("slave '" + s.name +
                     "' geometry differs between topology and policy");
            }
        }
        script.compiled = compile(spec);
        script.policy_source = std::move(spec);
    } else {
        const json& images = pol.at("images");
        if (!images.is_object()) fail("policy.images must be an object");
        for (const auto& s : script.slaves) {
            if (!s.guarded) continue;
            if (!images.contains(s.name)) {
                fail("policy.images lacks an image for guarded slave '" +
                     s.name + "'");
            }
            fs::path p = fs::path(base_dir) / images.at(s.name).get<std::string>();
            std::string bytes = read_file(p.string());
            auto result = deserialize(std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(bytes.data()),
                bytes.size()));
            if (!result.image) {
                fail("image " + p.string() + ": " + to_string(*result.error));
            }
            CompiledSlavePolicy c;
            c.slave = s.name;
            c.base = s.base;
            c.regs = s.regs;
            c.image = std::move(*result.image);
            script.compiled.push_back(std::move(c));
        }
    }
    if (any_guarded && script.compiled.empty()) {
        fail("guarded slaves present but the policy compiles to nothing");
    }

    // -- traffic --
    if (root.contains("traffic")) {
        for (const json& t : root.at("traffic")) {
            std::string master = require_string(t, "master", "traffic");
            auto mi = master_index(master);
            if (!mi) fail("traffic references unknown master '" + master + "'");
            TrafficItem item;
            item.issue_cycle = require_number(t, "cycle", "traffic");
            if (item.issue_cycle >= script.cycles) {
                fail("traffic entry issues at cycle " +
                     std::to_string(item.issue_cycle) + " beyond run length");
            }
            std::string op = require_string(t, "op", "traffic");
            if (op == "read") item.direction = Direction::Read;
            else if (op == "write") item.direction = Direction::Write;
            else fail("traffic op must be read or write");
            item.address = static_cast<u32>(require_number(t, "addr", "traffic"));
            u64 prot = number_or(t, "prot", 0);
            if (prot > 7) fail("traffic prot above 3 bits");
            item.prot = ProtAttr::unpack(static_cast<u8>(prot));
            u64 qos = number_or(t, "qos", 0);
            if (qos > 15) fail("traffic qos above 4 bits");
            item.qos = static_cast<u8>(qos);
            item.data = static_cast<u32>(number_or(t, "data", 0));
            script.masters[*mi].script.push_back(item);
        }
    }
    // Scripts stay in file order per master; issue order is script order.

    // -- trojans --
    if (root.contains("trojans")) {
        for (const json& t : root.at("trojans")) {
            std::string link = require_string(t, "link", "trojan");
            auto colon = link.find(':');
            if (colon == std::string::npos) {
                fail("trojan link must be master:<name> or slave:<name>");
            }
            std::string kind = link.substr(0, colon);
            std::string who = link.substr(colon + 1);
            Interposer ip;
            if (kind == "master") {
                auto mi = master_index(who);
                if (!mi) fail("trojan link references unknown master '" + who + "'");
                ip.position = {LinkRef::Type::Master, *mi};
            } else if (kind == "slave") {
                const SlaveConfig* s = slave_cfg(who);
                if (!s) fail("trojan link references unknown slave '" + who + "'");
                ip.position = {LinkRef::Type::Slave, s->id};
            } else {
                fail("trojan link must be master:<name> or slave:<name>");
            }
            ip.model = parse_trojan(t, script.cycles, "trojan on " + link);
            script.interposers.push_back(std::move(ip));
        }
    }

    // -- environment --
    if (root.contains("thresholds")) {
        const json& th = root.at("thresholds");
        Thresholds thr;
        auto pairf = [&th](const char* key, i64& lo, i64& hi) {
            if (!th.contains(key) || !th.at(key).is_array() ||
                th.at(key).size() != 2) {
                fail(std::string("thresholds.") + key + " must be [min, max]");
            }
            lo = th.at(key)[0].get<i64>();
            hi = th.at(key)[1].get<i64>();
        };
        pairf("voltage_mv", thr.voltage_min_mv, thr.voltage_max_mv);
        pairf("temp_mc", thr.temp_min_mc, thr.temp_max_mc);
        pairf("power_mw", thr.power_min_mw, thr.power_max_mw);
        thr.validate();
        script.thresholds = thr;
    }
    if (root.contains("env")) {
        if (!script.thresholds) {
            fail("env samples present but no thresholds section");
        }
        for (const json& e : root.at("env")) {
            EnvSample sample;
            sample.cycle = require_number(e, "cycle", "env");
            if (sample.cycle >= script.cycles) {
                fail("env sample beyond run length");
            }
            sample.voltage_mv = e.value("voltage_mv", static_cast<i64>(0));
            sample.temp_mc = e.value("temp_mc", static_cast<i64>(0));
            sample.power_mw = e.value("power_mw", static_cast<i64>(0));
            script.env.push_back(sample);
        }
    }

    // -- response policy --
    if (root.contains("response_policy")) {
        const json& rp = root.at("response_policy");
        std::map<EventKind, std::vector<Countermeasure>> mapping;
        for (auto it = rp.begin(); it != rp.end(); ++it) {
            auto kind = event_kind_from_string(it.key());
            if (!kind) fail("response_policy: unknown event kind '" + it.key() + "'");
            std::vector<Countermeasure> actions;
            for (const json& a : it.value()) {
                auto cm = countermeasure_from_string(a.get<std::string>());
                if (!cm) {
                    fail("response_policy: unknown countermeasure '" +
                         a.get<std::string>() + "'");
                }
                actions.push_back(*cm);
            }
            mapping[*kind] = std::move(actions);
        }
        script.response_policy = ResponsePolicy::from_map(mapping);
    }

    // -- scheduled configuration writes --
    if (root.contains("config_writes")) {
        for (const json& w : root.at("config_writes")) {
            ScheduledWrite sw;
            sw.cycle = require_number(w, "cycle", "config_writes");
            if (sw.cycle >= script.cycles) fail("config write beyond run length");
            std::string target = require_string(w, "target", "config_writes");
            auto colon = target.find(':');
            if (colon == std::string::npos) {
                fail("config write target must be spe:<slave> or sck:<master>");
            }
            std::string kind = target.substr(0, colon);
            std::string who = target.substr(colon + 1);
            if (kind == "spe") {
                const SlaveConfig* s = slave_cfg(who);
                if (!s) fail("config write references unknown slave '" + who + "'");
                sw.target = {ConfigTarget::Kind::Spe, s->id};
            } else if (kind == "sck") {
                auto mi = master_index(who);
                if (!mi) fail("config write references unknown master '" + who + "'");
                sw.target = {ConfigTarget::Kind::Sck, *mi};
            } else {
                fail("config write target must be spe:<slave> or sck:<master>");
            }
            sw.offset = static_cast<u32>(require_number(w, "offset", "config_writes"));
            sw.word = static_cast<u32>(require_number(w, "word", "config_writes"));
            script.config_writes.push_back(sw);
        }
    }

    return script;
}

ScenarioScript load_scenario(const std::string& path) {
    fs::path p(path);
    if (!fs::exists(p)) fail("scenario file not found: " + path);
    std::string text = read_file(path);
    std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
    return parse_scenario(text, p.stem().string(), base);
}

}  // namespace buswarden
