// reverse-bell: run postselection scenarios, recompute reports from stored
// ensembles, inspect foliations, and re-run the headline checks.
//
// Exit status: 0 success, 2 usage error, 3 a reproduce-paper check failed.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbell/rbell.hpp"

namespace fs = std::filesystem;
using rbell::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAcceptance = 3;
constexpr const char* kOutputDirEnv = "REVERSE_BELL_OUTPUT_DIR";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return "rbell-out";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --------------------------------------------------------------------------
// Report assembly, shared by simulate and analyze so both emit the same bytes
// --------------------------------------------------------------------------

json ensemble_report(const std::string& scenario_id, const std::map<std::string, std::vector<rbell::TrialRecord>>& groups,
                     const std::vector<std::string>& order, std::uint64_t discarded, std::string& csv) {
    json j;
    j["scenario_id"] = scenario_id;
    j["mode"] = "sampled";
    json subs = json::object();
    std::vector<rbell::TrialRecord> all;
    std::ostringstream rows;
    rows << "subensemble,alice_setting,bob_setting,E,n_equal,n_unequal\n";
    auto add_rows = [&](const std::string& name, const rbell::ChshReport& rep) {
        std::istringstream body(rbell::io::report_csv(rep));
        std::string line;
        std::getline(body, line);
        while (std::getline(body, line)) rows << name << ',' << line << '\n';
    };
    for (const auto& name : order) {
        const auto& recs = groups.at(name);
        if (recs.empty()) continue;
        all.insert(all.end(), recs.begin(), recs.end());
        try {
            const rbell::ChshReport rep = rbell::chsh_report(rbell::correlators_empirical(recs));
            subs[name] = rbell::io::to_json(rep);
            subs[name]["trials"] = recs.size();
            add_rows(name, rep);
        } catch (const rbell::InsufficientData& e) {
            subs[name] = {{"error", e.what()}, {"trials", recs.size()}};
        }
    }
    j["subensembles"] = subs;
    try {
        const rbell::ChshReport pooled = rbell::chsh_report(rbell::correlators_empirical(all));
        j["pooled"] = rbell::io::to_json(pooled);
        add_rows("pooled", pooled);
    } catch (const rbell::InsufficientData& e) {
        j["pooled"] = {{"error", e.what()}};
    }
    j["pooled"]["trials"] = all.size();
    j["discarded"] = discarded;
    csv = rows.str();
    return j;
}

json quantum_report(const rbell::PostselectedEnsembles& pe, std::string& csv) {
    std::map<std::string, std::vector<rbell::TrialRecord>> groups;
    std::vector<std::string> order;
    for (const auto& [tag, e] : pe.subensembles) {
        const std::string name = rbell::to_string(tag);
        order.push_back(name);
        groups[name] = e.records();
    }
    return ensemble_report(pe.scenario_id, groups, order, pe.discarded, csv);
}

json classical_report(const std::string& scenario_id, const rbell::ClassicalSubensembles& sel, std::string& csv) {
    std::map<std::string, std::vector<rbell::TrialRecord>> groups;
    std::vector<std::string> order;
    for (const auto& [label, trials] : sel.subensembles) {
        const std::string name(rbell::to_string(label));
        order.push_back(name);
        groups[name] = rbell::to_records(trials);
    }
    return ensemble_report(scenario_id, groups, order, sel.discarded.size(), csv);
}

json exact_report(const std::string& scenario_id, const std::map<std::string, rbell::OutcomeWeights>& parts,
                  double discarded) {
    json j;
    j["scenario_id"] = scenario_id;
    j["mode"] = "exact";
    json subs = json::object();
    std::vector<rbell::OutcomeWeights> all;
    for (const auto& [name, w] : parts) {
        subs[name] = rbell::io::to_json(rbell::chsh_report(rbell::correlators_weighted(w)));
        subs[name]["weight"] = w.total();
        all.push_back(w);
    }
    j["subensembles"] = subs;
    j["pooled"] = rbell::io::to_json(rbell::pooled_report(all));
    j["discarded_weight"] = discarded;
    return j;
}

// --------------------------------------------------------------------------
// Manifest
// --------------------------------------------------------------------------

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& dir) const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json j = {{"command", command},
                  {"argv", argv},
                  {"config", config},
                  {"versions", {{"reverse_bell", RBELL_VERSION}, {"nlohmann_json", NLOHMANN_JSON_VERSION_MAJOR}}},
                  {"rng", "SplitMix64; trial stream = RngStream(seed).split(trial_id)"},
                  {"outputs", outputs},
                  {"wall_clock_seconds", seconds}};
        write_file(dir / "manifest.json", dump(j));
    }
};

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

// --------------------------------------------------------------------------
// Subcommands
// --------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
    std::string config_path;
    std::uint64_t trials = 0;
    bool trials_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string order;
    bool exact = false;
    std::string strategy;
    double target_e = 0.0;
    bool target_set = false;
    std::vector<double> proportions;
    std::string out;
};

rbell::MeasurementOrder parse_order(const std::string& s) {
    if (s == "vicky_first") return rbell::kVickyFirst;
    if (s == "ab_first") return rbell::kAbFirst;
    rbell::MeasurementOrder o{};
    std::istringstream in(s);
    std::string part;
    std::size_t k = 0;
    while (std::getline(in, part, ',')) {
        if (k >= 3) throw UsageError("--order takes three comma-separated parties");
        o[k++] = rbell::io::parse_party(part);
    }
    if (k != 3) throw UsageError("--order takes three comma-separated parties");
    rbell::validate_order(o);
    return o;
}

int simulate_quantum(const SimulateArgs& a, Manifest& m) {
    rbell::ScenarioConfig cfg;
    if (!a.config_path.empty()) cfg = rbell::io::parse_scenario_config(read_json_file(a.config_path));
    cfg.scenario = rbell::io::parse_scenario(a.scenario);
    if (a.trials_set) cfg.trials = a.trials;
    if (a.seed_set) cfg.seed = a.seed;
    if (!a.order.empty()) cfg.order = parse_order(a.order);
    if (!a.exact && !a.trials_set && a.config_path.empty())
        throw UsageError("sampled mode needs --trials (or --config); use --exact for exact tables");
    if (!a.strategy.empty() || a.target_set || !a.proportions.empty())
        throw UsageError("--strategy/--target-e/--proportions apply to 'simulate classical' only");
    cfg.validate();
    m.config = rbell::io::to_json(cfg);
    m.config["mode"] = a.exact ? "exact" : "sampled";

    const fs::path dir = prepare_dir(a.out);
    json report;
    if (a.exact) {
        const rbell::ExactSubensembles ex = rbell::exact_scenario(cfg);
        std::map<std::string, rbell::OutcomeWeights> parts;
        std::vector<std::string> names;
        for (const auto& [tag, w] : ex.weights) parts.emplace(rbell::to_string(tag), w);
        report = exact_report(ex.scenario_id, parts, 0.0);
    } else {
        const rbell::PostselectedEnsembles pe = rbell::run_scenario(cfg);
        const rbell::Ensemble pooled = pe.pooled();
        std::ostringstream csv;
        rbell::io::write_trial_csv(csv, pe.scenario_id, pooled.records());
        write_file(dir / "ensemble.csv", csv.str());
        m.outputs.push_back("ensemble.csv");
        std::string report_csv;
        report = quantum_report(pe, report_csv);
        write_file(dir / "report.csv", report_csv);
        m.outputs.push_back("report.csv");
    }
    write_file(dir / "report.json", dump(report));
    m.outputs.push_back("report.json");
    m.write(dir);
    std::cout << dump(report);
    return kExitOk;
}

int simulate_classical(const SimulateArgs& a, Manifest& m) {
    if (a.strategy.empty()) throw UsageError("simulate classical needs --strategy mimic|superquantum|restricted");
    if (!a.order.empty()) throw UsageError("--order applies to quantum scenarios only");
    rbell::SettingProportions props;
    if (!a.proportions.empty()) {
        if (a.proportions.size() != 4) throw UsageError("--proportions takes four values a,b,c,d");
        props = {a.proportions[0], a.proportions[1], a.proportions[2], a.proportions[3]};
    }
    props.validate();
    if (a.strategy == "restricted") {
        if (!a.target_set) throw UsageError("restricted strategy needs --target-e");
        if (!(std::abs(a.target_e) <= 1.0)) throw UsageError("--target-e must lie in [-1, 1]");
    } else if (a.target_set) {
        throw UsageError("--target-e applies to the restricted strategy only");
    }
    if (a.strategy != "mimic" && a.strategy != "superquantum" && a.strategy != "restricted")
        throw UsageError("unknown strategy '" + a.strategy + "'");
    if (!a.exact && !a.trials_set) throw UsageError("sampled mode needs --trials; use --exact for exact tables");
    if (a.trials_set && a.trials < 1) throw UsageError("--trials must be at least 1");

    const std::string scenario_id = "classical-" + a.strategy;
    m.config = {{"scenario", "classical"},
                {"strategy", a.strategy},
                {"proportions", {props.a, props.b, props.c, props.d}},
                {"trials", a.trials},
                {"seed", a.seed},
                {"mode", a.exact ? "exact" : "sampled"}};
    if (a.target_set) m.config["target_e"] = a.target_e;

    const rbell::MimicStrategy mimic(rbell::standard_angles());
    const rbell::SuperquantumStrategy sq;
    const fs::path dir = prepare_dir(a.out);
    json report;
    if (a.exact) {
        rbell::ClassicalWeights w;
        if (a.strategy == "mimic")
            w = rbell::exact_weights(mimic, props);
        else if (a.strategy == "superquantum")
            w = rbell::exact_weights(sq, props);
        else
            w = rbell::exact_weights(rbell::TargetCorrelationStrategy(a.target_e), props);
        std::map<std::string, rbell::OutcomeWeights> parts;
        for (const auto& [label, ow] : w.subensembles) parts.emplace(std::string(rbell::to_string(label)), ow);
        report = exact_report(scenario_id, parts, w.discarded);
    } else {
        const auto coins = rbell::generate_coins(props, a.trials, a.seed);
        rbell::ClassicalSubensembles sel;
        if (a.strategy == "mimic")
            sel = rbell::apply_strategy(mimic, coins, a.seed);
        else if (a.strategy == "superquantum")
            sel = rbell::apply_strategy(sq, coins, a.seed);
        else
            sel = rbell::postselect_restricted(coins, a.target_e, a.seed);
        std::ostringstream csv;
        rbell::io::write_coin_csv(csv, sel);
        write_file(dir / "coins.csv", csv.str());
        m.outputs.push_back("coins.csv");
        std::string report_csv;
        report = classical_report(scenario_id, sel, report_csv);
        write_file(dir / "report.csv", report_csv);
        m.outputs.push_back("report.csv");
    }
    write_file(dir / "report.json", dump(report));
    m.outputs.push_back("report.json");
    m.write(dir);
    std::cout << dump(report);
    return kExitOk;
}

int analyze(const std::string& path, const std::string& out_dir) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    in.clear();
    in.seekg(0);

    json report;
    std::string csv;
    if (header == rbell::io::kTrialCsvHeader) {
        const auto data = rbell::io::read_trial_csv(in);
        std::map<std::string, std::vector<rbell::TrialRecord>> groups;
        std::map<rbell::VickyTag, std::string> tagged;
        std::vector<rbell::TrialRecord> untagged;
        for (const auto& r : data.records) {
            if (r.vicky_tag) {
                tagged.emplace(*r.vicky_tag, rbell::to_string(*r.vicky_tag));
                groups[rbell::to_string(*r.vicky_tag)].push_back(r);
            } else {
                untagged.push_back(r);
            }
        }
        std::vector<std::string> order;
        for (const auto& [tag, name] : tagged) order.push_back(name);
        if (!untagged.empty()) {
            groups["untagged"] = untagged;
            order.push_back("untagged");
        }
        report = ensemble_report(data.scenario_id, groups, order, 0, csv);
    } else if (header == rbell::io::kCoinCsvHeader) {
        const auto sel = rbell::io::read_coin_csv(in);
        std::string strategy = "unknown";
        if (!sel.subensembles.empty()) {
            const auto first = sel.subensembles.begin()->first;
            strategy = first == rbell::SubensembleLabel::accept ? "restricted"
                       : first >= rbell::SubensembleLabel::I_prime ? "superquantum"
                                                                   : "mimic";
        }
        report = classical_report("classical-" + strategy, sel, csv);
    } else {
        throw UsageError("unrecognized CSV header in " + path);
    }
    if (!out_dir.empty()) {
        const fs::path dir = prepare_dir(out_dir);
        write_file(dir / "report.json", dump(report));
        write_file(dir / "report.csv", csv);
    }
    std::cout << dump(report);
    return kExitOk;
}

int foliation(const std::string& path, std::optional<double> rapidity, double direction, bool enumerate,
              const std::vector<double>& grid) {
    const auto events = rbell::io::parse_events(read_json_file(path));
    json out;
    out["events"] = rbell::io::to_json(events)["events"];

    json relations = json::array();
    for (std::size_t i = 0; i < events.size(); ++i)
        for (std::size_t k = i + 1; k < events.size(); ++k)
            relations.push_back({{"from", std::string(rbell::to_string(events[i].label))},
                                 {"to", std::string(rbell::to_string(events[k].label))},
                                 {"relation", std::string(rbell::to_string(rbell::causal_relation(events[i], events[k])))}});
    out["relations"] = relations;

    auto has = [&](rbell::EventLabel l) {
        return std::any_of(events.begin(), events.end(), [&](const auto& e) { return e.label == l; });
    };
    const bool verdicts = has(rbell::EventLabel::alice) && has(rbell::EventLabel::bob) && has(rbell::EventLabel::vicky);

    if (rapidity || !enumerate) {
        const rbell::Foliation f(rapidity.value_or(0.0), direction);
        out["foliation"] = rbell::io::to_json(f);
        out["order"] = rbell::io::to_json(rbell::foliation_order(events, f));
        if (verdicts) out["verdict"] = std::string(rbell::to_string(rbell::selection_verdict(events, f)));
    }
    if (enumerate) {
        json orders = json::array();
        for (const auto& [perm, f] : rbell::enumerate_orderings_exact(events))
            orders.push_back({{"order", rbell::io::to_json(perm)}, {"witness", rbell::io::to_json(f)}});
        out["orderings"] = orders;
        if (!grid.empty()) {
            if (grid.size() != 4) throw UsageError("--grid takes min,max,step,directions");
            const auto g = rbell::rapidity_grid(grid[0], grid[1], grid[2], static_cast<int>(grid[3]));
            json gorders = json::array();
            for (const auto& [perm, f] : rbell::enumerate_orderings(events, g))
                gorders.push_back({{"order", rbell::io::to_json(perm)}, {"witness", rbell::io::to_json(f)}});
            out["grid_orderings"] = gorders;
        }
        if (verdicts) {
            json v = json::array();
            for (const auto& [verdict, f] : rbell::achievable_verdicts(events))
                v.push_back({{"verdict", std::string(rbell::to_string(verdict))}, {"witness", rbell::io::to_json(f)}});
            out["achievable_verdicts"] = v;
        }
    }
    std::cout << dump(out);
    return kExitOk;
}

int reproduce(std::uint64_t seed, std::uint64_t trials, const std::string& out_dir, Manifest& m) {
    const rbell::reproduction::Options opts{seed, trials};
    m.config = {{"seed", seed}, {"trials", trials}, {"mode", trials > 0 ? "exact+sampled" : "exact"}};
    const auto results = rbell::reproduction::run_all(opts);

    std::ostringstream table;
    bool all = true;
    table << "id  result  claim\n";
    for (const auto& r : results) {
        table << (r.id < 10 ? " " : "") << r.id << "  " << (r.passed ? "PASS  " : "FAIL  ") << "  " << r.claim << '\n';
        for (const auto& c : r.checks) table << "        " << c << '\n';
        all = all && r.passed;
    }
    table << (all ? "all claims reproduced\n" : "some claims FAILED\n");
    std::cout << table.str();

    const fs::path dir = prepare_dir(out_dir);
    write_file(dir / "reproduce.json", dump(rbell::reproduction::to_json(results)));
    write_file(dir / "reproduce.txt", table.str());
    m.outputs = {"reproduce.json", "reproduce.txt"};
    m.write(dir);
    return all ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reverse-Bell postselection simulator"};
    app.require_subcommand(1);
    Manifest manifest;
    manifest.argv.assign(argv, argv + argc);

    SimulateArgs sim;
    sim.out = default_output_dir();
    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write ensembles and reports");
    simulate->add_option("scenario", sim.scenario, "reverse | swap | parity | classical")
        ->required()
        ->check(CLI::IsMember({"reverse", "swap", "parity", "classical"}));
    simulate->add_option("--config", sim.config_path, "JSON scenario config")->check(CLI::ExistingFile);
    auto* trials_opt = simulate->add_option("--trials", sim.trials, "Number of trials (sampled mode)");
    auto* seed_opt = simulate->add_option("--seed", sim.seed, "64-bit seed");
    simulate->add_option("--order", sim.order, "vicky_first | ab_first | comma-separated parties");
    simulate->add_flag("--exact", sim.exact, "Exact subensemble tables instead of sampling");
    simulate->add_option("--strategy", sim.strategy, "mimic | superquantum | restricted (classical only)");
    auto* target_opt = simulate->add_option("--target-e", sim.target_e, "Target correlation for the restricted strategy");
    simulate->add_option("--proportions", sim.proportions, "Coin-pair proportions a,b,c,d")->delimiter(',');
    simulate->add_option("--out", sim.out, "Output directory");

    std::string analyze_path, analyze_out;
    auto* analyze_cmd = app.add_subcommand("analyze", "Recompute reports from a stored ensemble CSV");
    analyze_cmd->add_option("ensemble", analyze_path, "ensemble.csv or coins.csv")->required();
    analyze_cmd->add_option("--out", analyze_out, "Also write report.json/report.csv here");

    std::string events_path;
    double rapidity = 0.0, direction = 0.0;
    bool enumerate = false;
    std::vector<double> grid;
    auto* fol = app.add_subcommand("foliation", "Orders and pre/postselection verdicts for an event set");
    fol->add_option("events", events_path, "JSON event set")->required();
    auto* rap_opt = fol->add_option("--rapidity", rapidity, "Boost rapidity");
    fol->add_option("--direction", direction, "Boost direction angle in the x-y plane (radians)");
    fol->add_flag("--enumerate", enumerate, "List every achievable order and verdict");
    fol->add_option("--grid", grid, "Also scan a grid min,max,step,directions")->delimiter(',');

    std::uint64_t rp_seed = 7, rp_trials = 0;
    std::string rp_out = default_output_dir();
    auto* rp = app.add_subcommand("reproduce-paper", "Run every headline check and print a pass/fail table");
    rp->add_option("--seed", rp_seed, "Seed for the sampled checks");
    rp->add_option("--trials", rp_trials, "Trials for sampled checks (default: exact checks only)");
    rp->add_option("--out", rp_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            sim.trials_set = trials_opt->count() > 0;
            sim.seed_set = seed_opt->count() > 0;
            sim.target_set = target_opt->count() > 0;
            manifest.command = "simulate " + sim.scenario;
            return sim.scenario == "classical" ? simulate_classical(sim, manifest) : simulate_quantum(sim, manifest);
        }
        if (*analyze_cmd) return analyze(analyze_path, analyze_out);
        if (*fol) {
            return foliation(events_path, rap_opt->count() > 0 ? std::optional<double>(rapidity) : std::nullopt,
                             direction, enumerate, grid);
        }
        if (*rp) {
            manifest.command = "reproduce-paper";
            return reproduce(rp_seed, rp_trials, rp_out, manifest);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const rbell::InvalidInput& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
