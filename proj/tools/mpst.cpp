// mpst: command-line front-end for the session toolchain.

#include "mpst/erasure.hpp"
#include "mpst/gateway.hpp"
#include "mpst/procmatrix.hpp"
#include "mpst/runtime.hpp"
#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "mpst/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace mpst;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { Text, Json };

Format out_format = Format::Text;

std::string read_input(const std::string& path)
{
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string display_name(const std::string& path) { return path.empty() || path == "-" ? "<stdin>" : path; }

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json diagnostic_json(const Diagnostic& d)
{
    json j = {{"code", d.code}, {"message", d.message}};
    if (d.span.valid())
        j["span"] = {{"file", d.span.file},
                     {"line", d.span.start_line},
                     {"col", d.span.start_col},
                     {"endLine", d.span.end_line},
                     {"endCol", d.span.end_col}};
    if (!d.context.empty()) j["context"] = d.context;
    return j;
}

void report(const std::vector<Diagnostic>& ds)
{
    for (const auto& d : ds) {
        if (out_format == Format::Json)
            std::cerr << diagnostic_json(d).dump() << "\n";
        else
            std::cerr << format_diagnostic(d) << "\n";
    }
}

void emit(const std::string& text, const json& j)
{
    if (out_format == Format::Json)
        std::cout << j.dump() << "\n";
    else
        std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
}

// A type file, or a bare global type.
std::vector<TypeDecl> read_types(const std::string& path)
{
    std::string text = read_input(path);
    std::string file = display_name(path);
    try {
        return parse_type_file(text, file);
    } catch (const Error& first) {
        try {
            return {TypeDecl{"G", parse_global_type(text, file), std::nullopt, {}}};
        } catch (const Error&) {
            throw first;
        }
    }
}

std::vector<TypeDecl> types_of(const std::string& path)
{
    if (ends_with(path, ".mps")) return parse_program(read_input(path), display_name(path)).types;
    return read_types(path);
}

json steps_json(const std::vector<StepLabel>& steps)
{
    json out = json::array();
    for (size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        json j = {{"index", i + 1}, {"kind", step_kind_name(s.kind)}, {"chans", s.chans},
                  {"participant", s.participant}, {"payload", s.payload}};
        if (s.session) j["session"] = s.session;
        out.push_back(j);
    }
    return out;
}

void print_trace(const Trace& t)
{
    emit(format_trace(t),
         {{"steps", steps_json(t.steps)}, {"verdict", verdict_name(t.verdict)}, {"success", t.success}});
}

// Typechecked and elaborated, unless `untyped`.
Config load_config(const std::string& path, bool untyped)
{
    Program prog = parse_program(read_input(path), display_name(path));
    return initial_config(untyped ? prog.body : elaborate(typecheck(prog)));
}

Trace run_with_gateway(const Config& cfg, const std::string& host, int port, std::uint64_t seed, size_t fuel)
{
    Gateway gw;
    GatewayServer server(gw);
    int bound = server.bind(host, port);
    if (bound < 0) throw Error("E-GATEWAY", "cannot listen on " + host + ":" + std::to_string(port));
    std::thread listener([&] { server.listen(); });
    std::cerr << "gateway listening on http://" << host << ":" << bound << "\n";
    GatewayPolicy policy(gw, seed);
    Trace t;
    try {
        t = run(cfg, policy, fuel, [&](const StepLabel& s) { policy.observe(s); });
    } catch (...) {
        gw.shutdown();
        server.stop();
        listener.join();
        throw;
    }
    gw.shutdown();
    server.stop();
    listener.join();
    return t;
}

void add_format(CLI::App* cmd)
{
    cmd->add_option("--format", out_format, "Output format")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"text", Format::Text}, {"json", Format::Json}}));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiparty session toolchain with symmetric synchronisation"};
    app.require_subcommand(1, 1);

    std::string input;
    std::string kind;
    auto* parse_cmd = app.add_subcommand("parse", "Parse a file and print it in canonical form");
    parse_cmd->add_option("file", input, "Input (.mps program, .mpt types, .mlt local type; - for stdin)")->required();
    parse_cmd->add_option("--kind", kind, "program|types|global|local (default: by extension)")
        ->check(CLI::IsMember({"program", "types", "global", "local"}));
    add_format(parse_cmd);

    auto* check_cmd = app.add_subcommand("check", "Typecheck a program");
    check_cmd->add_option("file", input, "Program (.mps)")->required();
    add_format(check_cmd);

    auto* coherent_cmd = app.add_subcommand("check-coherent", "Check global types for coherence");
    coherent_cmd->add_option("file", input, "Type file or bare global type (default: stdin)");
    add_format(coherent_cmd);

    int role = 0;
    std::string type_name;
    auto* project_cmd = app.add_subcommand("project", "Project a global type onto a participant");
    project_cmd->add_option("file", input, "Type file (.mpt) or program (.mps)")->required();
    project_cmd->add_option("--role", role, "Participant")->required()->check(CLI::PositiveNumber);
    project_cmd->add_option("--type", type_name, "Declared type name (default: the only one)");
    add_format(project_cmd);

    std::uint64_t seed = 0;
    size_t fuel = 10000;
    std::string script;
    bool interactive = false;
    bool untyped = false;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* run_cmd = app.add_subcommand("run", "Run a program and print its trace");
    run_cmd->add_option("file", input, "Program (.mps)")->required();
    run_cmd->add_option("--seed", seed, "Seed for choices");
    run_cmd->add_option("--fuel", fuel, "Step bound");
    auto* script_opt = run_cmd->add_option("--script", script, "Scripted sync decisions");
    auto* interactive_flag = run_cmd->add_flag("--interactive", interactive, "Take sync decisions from the gateway");
    script_opt->excludes(interactive_flag);
    run_cmd->add_option("--host", host, "Gateway host (with --interactive)");
    run_cmd->add_option("--port", port, "Gateway port (with --interactive; 0 picks one)");
    run_cmd->add_flag("--untyped", untyped, "Run without typechecking");
    add_format(run_cmd);

    int depth = 200;
    size_t max_nodes = 200000;
    auto* explore_cmd = app.add_subcommand("explore", "Explore the state space of a program");
    explore_cmd->add_option("file", input, "Program (.mps)")->required();
    explore_cmd->add_option("--depth", depth, "Depth bound");
    explore_cmd->add_option("--max-nodes", max_nodes, "Configuration bound");
    explore_cmd->add_flag("--untyped", untyped, "Explore without typechecking");
    add_format(explore_cmd);

    std::string manifest;
    auto* erase_cmd = app.add_subcommand("erase", "Erase synchronisation into conducted branching");
    erase_cmd->add_option("file", input, "Program (.mps)")->required();
    erase_cmd->add_option("--manifest", manifest, "Write the manifest here instead of a trailing comment");
    add_format(erase_cmd);

    auto* pm_cmd = app.add_subcommand("pm-encode", "Encode a process matrix as a global type");
    pm_cmd->add_option("file", input, "Matrix (.json)")->required();
    add_format(pm_cmd);

    auto* serve_cmd = app.add_subcommand("serve", "Run a program with sync decisions taken through the gateway");
    serve_cmd->add_option("file", input, "Program (.mps)")->required();
    serve_cmd->add_option("--seed", seed, "Seed for rand choices");
    serve_cmd->add_option("--fuel", fuel, "Step bound");
    serve_cmd->add_option("--host", host, "Listen host");
    serve_cmd->add_option("--port", port, "Listen port (0 picks one)");
    add_format(serve_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "E-USAGE: " << e.what() << "\n";
        return 2;
    }

    try {
        if (parse_cmd->parsed()) {
            std::string text = read_input(input);
            std::string file = display_name(input);
            if (kind.empty())
                kind = ends_with(input, ".mpt") ? "types" : ends_with(input, ".mlt") ? "local" : "program";
            std::string out;
            if (kind == "program")
                out = render(parse_program(text, file));
            else if (kind == "global")
                out = render(parse_global_type(text, file));
            else if (kind == "local")
                out = render(parse_local_type(text, file));
            else
                for (const auto& d : parse_type_file(text, file)) {
                    out += "type " + d.name;
                    if (d.dims) out += "[" + std::to_string(d.dims->first) + "," + std::to_string(d.dims->second) + "]";
                    out += " = " + render(d.type) + ";\n";
                }
            emit(out, {{"ok", true}, {"kind", kind}, {"text", out}});
        } else if (check_cmd->parsed()) {
            Program prog = parse_program(read_input(input), display_name(input));
            Derivation d = typecheck(prog);
            size_t sessions = 0;
            std::function<void(const Derivation&)> count = [&](const Derivation& n) {
                if (n.rule == Rule::Mcast) ++sessions;
                for (const auto& p : n.premises) count(p);
            };
            count(d);
            emit("ok", {{"ok", true}, {"sessions", sessions}});
        } else if (coherent_cmd->parsed()) {
            std::vector<Diagnostic> all;
            json types = json::array();
            for (const auto& d : read_types(input)) {
                auto errs = coherence_errors(d.type);
                Dimensions dims = dimensions(d.type);
                types.push_back({{"name", d.name},
                                 {"coherent", errs.empty()},
                                 {"channels", dims.channels},
                                 {"participants", dims.participants}});
                all.insert(all.end(), errs.begin(), errs.end());
            }
            if (!all.empty()) throw Error(all);
            std::string text;
            for (const auto& t : types)
                text += t["name"].get<std::string>() + ": coherent (" + std::to_string(t["channels"].get<int>()) +
                        " channels, " + std::to_string(t["participants"].get<int>()) + " participants)\n";
            emit(text, {{"ok", true}, {"types", types}});
        } else if (project_cmd->parsed()) {
            auto decls = types_of(input);
            const TypeDecl* chosen = nullptr;
            for (const auto& d : decls)
                if (type_name.empty() ? decls.size() == 1 : d.name == type_name) chosen = &d;
            if (!chosen) {
                if (type_name.empty()) throw UsageError("several types declared; choose one with --type");
                throw UsageError("no type named '" + type_name + "'");
            }
            check_coherent(chosen->type);
            LocalPtr local = project(chosen->type, role);
            std::string text = render(local);
            emit(text, {{"type", chosen->name}, {"role", role}, {"local", text}});
        } else if (run_cmd->parsed()) {
            Config cfg = load_config(input, untyped);
            if (interactive) {
                print_trace(run_with_gateway(cfg, host, port, seed, fuel));
            } else if (!script.empty()) {
                ScriptedPolicy policy(parse_script(read_input(script), display_name(script)), seed);
                print_trace(run(cfg, policy, fuel));
            } else {
                UniformPolicy policy(seed);
                print_trace(run(cfg, policy, fuel));
            }
        } else if (explore_cmd->parsed()) {
            Config cfg = load_config(input, untyped);
            ExploreResult r = explore(cfg, {depth, max_nodes});
            auto traces = decision_traces(r);
            std::ostringstream text;
            text << "nodes: " << r.nodes.size() << "\n"
                 << "terminal: " << r.terminal << "\n"
                 << "stuck: " << r.stuck << "\n"
                 << "truncated: " << (r.truncated ? "yes" : "no") << "\n"
                 << "success reachable: " << (r.success_reachable ? "yes" : "no") << "\n"
                 << "decision traces: " << traces.size() << "\n";
            for (const auto& t : traces) {
                text << " ";
                for (const auto& l : t) text << " " << l;
                text << "\n";
            }
            for (const auto& f : r.faults) text << "fault: " << f << "\n";
            emit(text.str(), {{"nodes", r.nodes.size()},
                              {"terminal", r.terminal},
                              {"stuck", r.stuck},
                              {"truncated", r.truncated},
                              {"successReachable", r.success_reachable},
                              {"decisionTraces", traces},
                              {"faults", r.faults}});
            if (!r.faults.empty()) return 1;
        } else if (erase_cmd->parsed()) {
            Program prog = parse_program(read_input(input), display_name(input));
            ErasedProgram e = erase(prog);
            std::string program = render(e.program);
            std::string man = manifest_json(e);
            if (!manifest.empty()) {
                std::ofstream out(manifest);
                if (!out) throw UsageError("cannot write '" + manifest + "'");
                out << man << "\n";
            }
            std::string text = program;
            if (manifest.empty()) text += (program.empty() || program.back() == '\n' ? "" : "\n") + ("// manifest " + json::parse(man).dump());
            emit(text, {{"program", program}, {"manifest", json::parse(man)}});
        } else if (pm_cmd->parsed()) {
            ProcessMatrix m = load_matrix(read_input(input), display_name(input));
            GlobalPtr g = encode(m);
            std::string text = render(g);
            Dimensions dims = dimensions(g);
            emit(text, {{"type", text}, {"channels", dims.channels}, {"participants", dims.participants}});
        } else if (serve_cmd->parsed()) {
            print_trace(run_with_gateway(load_config(input, false), host, port, seed, fuel));
        }
    } catch (const UsageError& e) {
        std::cerr << "E-USAGE: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        report(e.diagnostics());
        return 1;
    }
    return 0;
}
