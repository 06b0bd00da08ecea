#include "risolve/risolve.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

// Command line front end: solve formula files or a REPL, generate and run
// benchmark collections, and query the brute-force oracle. Results are
// emitted as JSON lines with stable field names.

namespace {

using nlohmann::json;
using namespace risolve;

struct common_flags {
    long long int_bound = 1000;
    long long depth_limit = 10000;
    int timeout_ms = 0;
    bool all_solutions = false;
    bool trace = false;
    bool json_out = false;
    bool force = false;
    bool unsafe_patterns = false;
    bool explain_admissibility = false;
    std::string funcpred_config;
    int jobs = 1;
};

void add_common(CLI::App* cmd, common_flags& fl) {
    cmd->add_option("--int-bound", fl.int_bound,
                    "integer search bound for the X solver (env RIS_INT_BOUND)");
    cmd->add_option("--depth-limit", fl.depth_limit, "rule applications per branch");
    cmd->add_option("--timeout", fl.timeout_ms, "per-formula timeout in milliseconds");
    cmd->add_flag("--all-solutions", fl.all_solutions, "enumerate every surviving branch");
    cmd->add_flag("--trace", fl.trace, "print one line per rule application");
    cmd->add_flag("--json", fl.json_out, "JSON lines output");
    cmd->add_flag("--force", fl.force, "solve even when classified non-admissible");
    cmd->add_flag("--unsafe-patterns", fl.unsafe_patterns,
                  "accept RIS patterns beyond the control term and [ctrl,t]");
    cmd->add_flag("--explain-admissibility", fl.explain_admissibility,
                  "print the offending classification equation");
    cmd->add_option("--funcpreds", fl.funcpred_config,
                    "functional predicate declarations (TOML-like file)");
    cmd->add_option("--jobs", fl.jobs, "parallel workers for batch runs");
}

solver_options make_options(const common_flags& fl) {
    solver_options opt;
    if (const char* e = std::getenv("RIS_INT_BOUND"))
        opt.int_bound = std::atoll(e);
    opt.int_bound = fl.int_bound != 1000 ? fl.int_bound : opt.int_bound;
    opt.depth_limit = fl.depth_limit;
    opt.timeout_ms = fl.timeout_ms;
    opt.all_solutions = fl.all_solutions;
    opt.trace = fl.trace;
    opt.trace_out = &std::cerr;
    opt.force = fl.force;
    return opt;
}

funcpred_registry make_registry(const common_flags& fl) {
    if (fl.funcpred_config.empty())
        return funcpred_registry();
    std::ifstream in(fl.funcpred_config);
    if (!in)
        throw std::runtime_error("cannot open " + fl.funcpred_config);
    std::stringstream ss;
    ss << in.rdbuf();
    return funcpred_registry::from_config(ss.str());
}

const char* status_str(solve_status st) {
    switch (st) {
    case solve_status::sat: return "sat";
    case solve_status::unsat: return "unsat";
    case solve_status::timeout: return "timeout";
    case solve_status::nonadmissible: return "nonadmissible";
    case solve_status::unknown: return "unknown";
    }
    return "unknown";
}

struct record {
    int id = 0;
    std::string status;
    double time_ms = 0;
    json solutions = json::array();
    std::string error;
    std::string detail;
    bool warning = false;
};

record solve_one(const std::string& text, int id, const common_flags& fl) {
    record rec;
    rec.id = id;
    parse_options popt;
    popt.unsafe_patterns = fl.unsafe_patterns;
    funcpred_registry reg = make_registry(fl);
    popt.funcpred_names = reg.names();
    auto t0 = std::chrono::steady_clock::now();
    try {
        formula f = parse(text, popt);
        var_set orig = free_vars(f);
        solver s(make_options(fl), reg);
        solve_result res = s.solve(f);
        rec.status = status_str(res.status);
        rec.warning = res.bounded_warning;
        if (res.status == solve_status::nonadmissible && fl.explain_admissibility)
            rec.detail = res.detail;
        for (auto& sol : res.solutions) {
            presented_solution p = present(sol, orig, s.vars());
            json js;
            js["bindings"] = json::object();
            for (auto& [k, v] : p.bindings)
                js["bindings"][k] = v;
            js["residual"] = json::array();
            for (auto& r : p.residual)
                js["residual"].push_back(r);
            js["model"] = json::object();
            for (auto& [k, v] : p.model)
                js["model"][k] = v;
            rec.solutions.push_back(js);
        }
        if (res.status == solve_status::nonadmissible && fl.force) {
            // unreachable: force bypasses the check
        }
    } catch (const parse_error& e) {
        rec.status = "parse_error";
        rec.error = e.what();
    } catch (const internal_error& e) {
        rec.status = "error";
        rec.error = e.what();
    } catch (const std::exception& e) {
        rec.status = "unknown";
        rec.error = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    rec.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rec;
}

void print_record(const record& rec, bool json_out, const std::string& text) {
    if (json_out) {
        json js;
        js["id"] = rec.id;
        js["status"] = rec.status;
        js["time_ms"] = rec.time_ms;
        js["solutions"] = rec.solutions;
        if (!rec.error.empty())
            js["error"] = rec.error;
        if (!rec.detail.empty())
            js["detail"] = rec.detail;
        if (rec.warning)
            js["warning"] = "bounded";
        std::cout << js.dump() << "\n";
        return;
    }
    std::cout << "% " << text << "\n";
    std::cout << rec.status;
    if (!rec.detail.empty())
        std::cout << "  (" << rec.detail << ")";
    std::cout << "\n";
    int i = 1;
    for (auto& sol : rec.solutions) {
        std::cout << "solution " << i++ << ":";
        bool any = false;
        for (auto& [k, v] : sol["bindings"].items()) {
            std::cout << (any ? ", " : " ") << k << " = " << v.get<std::string>();
            any = true;
        }
        if (!any)
            std::cout << " true";
        std::cout << "\n";
        for (auto& r : sol["residual"])
            std::cout << "  Constraint: " << r.get<std::string>() << "\n";
    }
    if (!rec.error.empty())
        std::cout << "error: " << rec.error << "\n";
}

// The batch runner keeps input order in the output regardless of completion
// order; each record gets its own solver.
int run_batch(const std::vector<source_formula>& fms, const common_flags& fl) {
    std::vector<record> recs(fms.size());
    std::atomic<size_t> next{0};
    int jobs = std::max(1, fl.jobs);
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= fms.size())
                return;
            recs[i] = solve_one(fms[i].text, static_cast<int>(i + 1), fl);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    bool parse_failure = false;
    for (size_t i = 0; i < fms.size(); ++i) {
        print_record(recs[i], fl.json_out, fms[i].text);
        if (recs[i].status == "parse_error")
            parse_failure = true;
    }
    return parse_failure ? 2 : 0;
}

std::vector<source_formula> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return split_formulas(ss.str());
}

int cmd_repl(const common_flags& fl) {
    std::string line;
    std::cout << "risolve> " << std::flush;
    while (std::getline(std::cin, line)) {
        if (line == "quit" || line == "exit")
            break;
        if (!line.empty()) {
            record rec = solve_one(line, 1, fl);
            print_record(rec, fl.json_out, line);
        }
        std::cout << "risolve> " << std::flush;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver for finite-set formulas with restricted intensional sets"};
    app.require_subcommand(1);

    common_flags fl;

    auto* solve_cmd = app.add_subcommand("solve", "solve each formula in a file");
    std::string solve_file;
    solve_cmd->add_option("file", solve_file, "formula file (one per line, % comments)")
        ->required();
    add_common(solve_cmd, fl);

    auto* repl_cmd = app.add_subcommand("repl", "interactive prompt");
    add_common(repl_cmd, fl);

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force ground-truth check");
    std::string oracle_file;
    std::string universe = "a,b,c";
    long long olo = -3, ohi = 3;
    oracle_cmd->add_option("file", oracle_file, "formula file")->required();
    oracle_cmd->add_option("--universe", universe, "comma-separated constants");
    oracle_cmd->add_option("--int-lo", olo, "lower integer bound");
    oracle_cmd->add_option("--int-hi", ohi, "upper integer bound");
    add_common(oracle_cmd, fl);

    auto* bench_cmd = app.add_subcommand("bench", "benchmark generation and runs");
    auto* gen_cmd = bench_cmd->add_subcommand("gen", "generate a collection");
    std::string gen_base, gen_out, gen_mode = "negative";
    unsigned gen_seed = 0;
    gen_cmd->add_option("-i,--base", gen_base,
                        "base theorem file (builtin corpus when omitted)");
    gen_cmd->add_option("-o,--out", gen_out, "output file")->required();
    gen_cmd->add_option("--mode", gen_mode, "negative | positive");
    gen_cmd->add_option("--seed", gen_seed, "generator seed");
    auto* run_cmd = bench_cmd->add_subcommand("run", "solve a generated collection");
    std::string run_file;
    run_cmd->add_option("file", run_file, "collection file")->required();
    add_common(run_cmd, fl);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed())
            return run_batch(read_file(solve_file), fl);
        if (repl_cmd->parsed())
            return cmd_repl(fl);
        if (oracle_cmd->parsed()) {
            auto fms = read_file(oracle_file);
            parse_options popt;
            popt.unsafe_patterns = fl.unsafe_patterns;
            oracle_options oopt;
            oopt.universe.clear();
            std::stringstream ss(universe);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty())
                    oopt.universe.push_back(item);
            oopt.int_lo = olo;
            oopt.int_hi = ohi;
            funcpred_registry reg;
            bool parse_failure = false;
            int id = 1;
            for (auto& f : fms) {
                json js;
                js["id"] = id++;
                try {
                    formula phi = parse(f.text, popt);
                    oracle_verdict v = brute_force_sat(phi, oopt, reg);
                    js["status"] = v.sat ? "sat" : "unsat";
                    if (v.sat) {
                        json w;
                        for (auto& [k, val] : v.witness.svals)
                            w[k] = value_str(val);
                        for (auto& [k, val] : v.witness.xvals)
                            w[k] = value_str(val);
                        js["witness"] = w;
                    }
                } catch (const parse_error& e) {
                    js["status"] = "parse_error";
                    js["error"] = e.what();
                    parse_failure = true;
                } catch (const std::exception& e) {
                    js["status"] = "error";
                    js["error"] = e.what();
                }
                std::cout << js.dump() << "\n";
            }
            return parse_failure ? 2 : 0;
        }
        if (gen_cmd->parsed()) {
            std::vector<source_formula> bases;
            if (gen_base.empty()) {
                int line = 1;
                for (auto& t : builtin_theorems())
                    bases.push_back({t, line++});
            } else {
                bases = read_file(gen_base);
            }
            std::ofstream out(gen_out);
            if (!out)
                throw std::runtime_error("cannot open " + gen_out);
            bench_stats st =
                bench_generate(bases, gen_mode == "positive", gen_seed, out);
            std::cerr << "generated " << st.instances << " instances from " << st.bases
                      << " base formulas";
            if (st.trivial_skipped)
                std::cerr << " (" << st.trivial_skipped << " trivial, skipped)";
            std::cerr << "\n";
            return 0;
        }
        if (run_cmd->parsed())
            return run_batch(read_file(run_file), fl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
