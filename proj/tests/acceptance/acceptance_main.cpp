// Runs every acceptance criterion and prints one PASS/FAIL line each.
//
//   rbell_acceptance [--criterion N] [--seed S] [--trials N] --cli PATH --work DIR
//
// Criteria 1-9 run in-process; 10 runs the CLI twice and compares bytes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "rbell/reproduction.hpp"

namespace fs = std::filesystem;
namespace rp = rbell::reproduction;

namespace {

struct Args {
    int criterion = 0;
    std::uint64_t seed = 7;
    std::uint64_t trials = 1000000;
    std::string cli;
    fs::path work = fs::temp_directory_path() / "rbell_acceptance";
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

rp::ClaimResult reproducibility(const Args& a) {
    rp::ClaimResult r{10, "reproduce-paper --seed S twice yields byte-identical outputs"};
    if (a.cli.empty()) {
        r.check(false, "no --cli given");
        return r;
    }
    const std::string seed = std::to_string(a.seed);
    const std::string trials = std::to_string(a.trials);
    std::string outs[2];
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = a.work / ("run" + std::to_string(run));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::string cmd = quote(a.cli) + " reproduce-paper --seed " + seed + " --trials " + trials + " --out " +
                                quote(dir.string()) + " > " + quote((dir / "stdout.txt").string()) + " 2>&1";
        const int status = std::system(cmd.c_str());
        r.check(status != -1 && fs::exists(dir / "reproduce.json"), "run " + std::to_string(run + 1) + " produced output");
        outs[run] = dir.string();
    }
    for (const char* f : {"reproduce.json", "reproduce.txt", "stdout.txt"}) {
        const std::string x = slurp(fs::path(outs[0]) / f), y = slurp(fs::path(outs[1]) / f);
        r.check(!x.empty() && x == y, std::string(f) + " identical (" + std::to_string(x.size()) + " bytes)");
    }
    return r;
}

void print(const rp::ClaimResult& r) {
    std::cout << "criterion " << r.id << ": " << (r.passed ? "PASS" : "FAIL") << "  " << r.claim << '\n';
    for (const auto& c : r.checks) std::cout << "    " << c << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    Args a;
    for (int k = 1; k < argc; ++k) {
        const std::string s = argv[k];
        auto next = [&]() -> std::string {
            if (k + 1 >= argc) {
                std::cerr << s << " needs a value\n";
                std::exit(2);
            }
            return argv[++k];
        };
        if (s == "--criterion")
            a.criterion = std::stoi(next());
        else if (s == "--seed")
            a.seed = std::stoull(next());
        else if (s == "--trials")
            a.trials = std::stoull(next());
        else if (s == "--cli")
            a.cli = next();
        else if (s == "--work")
            a.work = next();
        else {
            std::cerr << "unknown argument " << s << '\n';
            return 2;
        }
    }

    const rp::Options opts{a.seed, a.trials};
    using Fn = rp::ClaimResult (*)(const rp::Options&);
    const Fn claims[] = {rp::maximal_violations, rp::reverse_protocol, rp::pooled_null,
                         rp::classical_mimic,    rp::superquantum,     rp::restricted_bound,
                         rp::parity_control,     rp::entanglement_swap, rp::foliations};

    bool all = true;
    for (int id = 1; id <= 10; ++id) {
        if (a.criterion != 0 && a.criterion != id) continue;
        const rp::ClaimResult r = id <= 9 ? claims[id - 1](opts) : reproducibility(a);
        print(r);
        all = all && r.passed;
    }
    return all ? 0 : 1;
}
