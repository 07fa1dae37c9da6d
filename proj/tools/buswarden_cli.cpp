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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "buswarden/runner.hpp"

namespace {

using namespace buswarden;

int cmd_run(const std::string& scenario, const RunOptions& options) {
    RunResult result = run_scenario(scenario, options);
    const VerdictReport& rep = result.report;

    std::cout << "scenario:        " << rep.scenario << "\n"
              << "cycles run:      " << rep.cycles_run << "\n"
              << "transactions:    " << rep.completed << "/" << rep.scripted
              << " completed\n"
              << "events:          " << rep.events.size() << "\n";
    for (const auto& ev : rep.events) {
        std::cout << "  cycle " << ev.cycle << ": " << to_string(ev.kind)
                  << " from " << to_string(ev.source) << "\n";
    }
    if (!rep.stalls.empty()) {
        std::cout << "stalls:          " << rep.stalls.size() << "\n";
    }
    if (!rep.countermeasures.empty()) {
        std::cout << "countermeasures:\n";
        for (const auto& cm : rep.countermeasures) {
            std::cout << "  cycle " << cm.cycle << ": " << to_string(cm.action)
                      << " (" << to_string(cm.trigger) << ")\n";
        }
    }
    std::cout << "leaked accesses: " << rep.leaked_accesses << "\n";
    switch (rep.exit_code) {
        case kExitClean:
            std::cout << "verdict: clean\n";
            break;
        case kExitDetected:
            std::cout << "verdict: attack detected and contained\n";
            break;
        case kExitLeak:
            std::cout << "verdict: POLICY LEAK\n";
            break;
        default:
            break;
    }
    return rep.exit_code;
}

int cmd_compile(const std::string& policy_path, const std::string& out_path,
                const std::string& slave_name) {
    std::ifstream in(policy_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open policy file: " << policy_path << "\n";
        return kExitUsage;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    ParseResult parsed = parse_policy(text);
    if (!parsed.spec) {
        for (const auto& d : parsed.errors) {
            std::cerr << policy_path << ":" << d.format() << "\n";
        }
        return kExitUsage;
    }
    auto diags = validate(*parsed.spec);
    if (!diags.empty()) {
        for (const auto& d : diags) {
            std::cerr << policy_path << ":" << d.format() << "\n";
        }
        return kExitUsage;
    }
    auto compiled = compile(*parsed.spec);
    const CompiledSlavePolicy* chosen = nullptr;
    if (!slave_name.empty()) {
        chosen = find_compiled(compiled, slave_name);
        if (!chosen) {
            std::cerr << "policy declares no slave named '" << slave_name
                      << "'\n";
            return kExitUsage;
        }
    } else if (compiled.size() == 1) {
        chosen = &compiled.front();
    } else {
        std::cerr << "policy declares " << compiled.size()
                  << " slaves; pick one with --slave\n";
        return kExitUsage;
    }
    auto bytes = serialize(chosen->image);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << out_path << "\n";
        return kExitUsage;
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    std::cout << "wrote " << bytes.size() << " bytes for slave '"
              << chosen->slave << "' (" << chosen->image.device_words.size()
              << " device words, " << chosen->image.policy_words.size()
              << " policy words)\n";
    return kExitClean;
}

int cmd_audit(const std::string& trace_path, const std::string& policy_path) {
    std::ifstream in(policy_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open policy file: " << policy_path << "\n";
        return kExitUsage;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    ParseResult parsed = parse_policy(text);
    if (!parsed.spec) {
        for (const auto& d : parsed.errors) {
            std::cerr << policy_path << ":" << d.format() << "\n";
        }
        return kExitUsage;
    }
    auto diags = validate(*parsed.spec);
    if (!diags.empty()) {
        for (const auto& d : diags) {
            std::cerr << policy_path << ":" << d.format() << "\n";
        }
        return kExitUsage;
    }
    auto records = load_trace(trace_path);
    u64 leaked = audit_trace(records, *parsed.spec);
    std::cout << "leaked accesses: " << leaked << "\n";
    return leaked > 0 ? kExitLeak : kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"buswarden: AXI4 fabric simulator with bus policing"};
    app.require_subcommand(1);

    std::string scenario_path;
    RunOptions options;
    std::string trace_path, report_path;
    std::uint64_t cycles = 0, seed = 0;
    CLI::App* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", scenario_path, "scenario file (JSON)")
        ->required();
    auto* trace_opt = run->add_option("--trace", trace_path,
                                      "write the cycle trace (JSON lines)");
    auto* report_opt =
        run->add_option("--report", report_path, "write the verdict report");
    auto* cycles_opt =
        run->add_option("--cycles", cycles, "override the run length");
    auto* seed_opt = run->add_option("--seed", seed, "override the seed");

    std::string policy_path, image_path, slave_name;
    CLI::App* compile_cmd =
        app.add_subcommand("compile", "compile a policy to a table image");
    compile_cmd->add_option("policy", policy_path, "policy source file")
        ->required();
    compile_cmd->add_option("-o,--output", image_path, "image output path")
        ->required();
    compile_cmd->add_option("--slave", slave_name,
                            "slave to emit (defaults to the only one)");

    std::string audit_trace_path, audit_policy_path;
    CLI::App* audit_cmd =
        app.add_subcommand("audit", "audit a trace against a policy");
    audit_cmd->add_option("trace", audit_trace_path, "trace file (JSON lines)")
        ->required();
    audit_cmd->add_option("policy", audit_policy_path, "policy source file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) {
            if (*trace_opt) options.trace_path = trace_path;
            if (*report_opt) options.report_path = report_path;
            if (*cycles_opt) options.cycles_override = cycles;
            if (*seed_opt) options.seed_override = seed;
            return cmd_run(scenario_path, options);
        }
        if (app.got_subcommand(compile_cmd)) {
            return cmd_compile(policy_path, image_path, slave_name);
        }
        if (app.got_subcommand(audit_cmd)) {
            return cmd_audit(audit_trace_path, audit_policy_path);
        }
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return buswarden::kExitUsage;
    } catch (const TraceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return buswarden::kExitUsage;
    } catch (const BuildError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return buswarden::kExitUsage;
    }
    return buswarden::kExitUsage;
}
