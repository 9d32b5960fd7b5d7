#pragma once

// File formats.
//
// Report JSON (one object per CHSH report):
//   {"E": [[E11, E12], [E21, E22]],
//    "counts": [[[eq, neq], [eq, neq]], [[eq, neq], [eq, neq]]] | null,
//    "S": [S1, S2, S3, S4], "violated": [b1, b2, b3, b4], "max_S": m}
// "counts" is null for exact tables.
//
// Report CSV: alice_setting,bob_setting,E,n_equal,n_unequal (one row per
// setting pair; counts empty for exact tables).
//
// Trial CSV: trial_id,scenario_id,alice_setting,bob_setting,alice_outcome,
//            bob_outcome,vicky_tag
// Coin CSV:  trial_id,alice_coin,bob_coin,alice_face,bob_face,subensemble_label
//
// Scenario config and event sets are JSON; see parse_scenario_config and
// parse_events for the keys.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbell/chsh.hpp"
#include "rbell/classical.hpp"
#include "rbell/errors.hpp"
#include "rbell/protocols.hpp"
#include "rbell/spacetime.hpp"

namespace rbell::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// --------------------------------------------------------------------------
// Reports
// --------------------------------------------------------------------------

inline json to_json(const CorrelatorTable& t) {
    json j;
    j["E"] = {{t.E[0][0], t.E[0][1]}, {t.E[1][0], t.E[1][1]}};
    if (t.counts) {
        json c = json::array();
        for (const auto& row : *t.counts) {
            json r = json::array();
            for (const auto& cell : row) r.push_back({cell.equal, cell.unequal});
            c.push_back(r);
        }
        j["counts"] = c;
    } else {
        j["counts"] = nullptr;
    }
    return j;
}

inline json to_json(const ChshReport& r) {
    json j = to_json(r.table);
    j["S"] = r.S;
    j["violated"] = r.violated;
    j["max_S"] = r.max_S;
    return j;
}

inline std::string report_csv(const ChshReport& r) {
    std::ostringstream os;
    os << "alice_setting,bob_setting,E,n_equal,n_unequal\n";
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            os << i << ',' << j << ',' << format_double(r.table.e(i, j)) << ',';
            if (r.table.counts) {
                const auto& c = (*r.table.counts)[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
                os << c.equal << ',' << c.unequal;
            } else {
                os << ',';
            }
            os << '\n';
        }
    return os.str();
}

// --------------------------------------------------------------------------
// CSV helpers
// --------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidInput(std::string("cannot parse ") + what + " from '" + s + "'");
    return v;
}

inline void expect_header(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw InvalidInput("unexpected CSV header: " + line);
}

}  // namespace detail

inline constexpr std::string_view kTrialCsvHeader =
    "trial_id,scenario_id,alice_setting,bob_setting,alice_outcome,bob_outcome,vicky_tag";
inline constexpr std::string_view kCoinCsvHeader =
    "trial_id,alice_coin,bob_coin,alice_face,bob_face,subensemble_label";

inline std::optional<VickyTag> parse_vicky_tag(std::string_view s) {
    for (BellOutcome b : kBellOutcomes)
        if (to_string(b) == s) return b;
    for (ParityOutcome p : kParityOutcomes)
        if (to_string(p) == s) return p;
    return std::nullopt;
}

inline void write_trial_csv(std::ostream& os, const std::string& scenario_id, std::span<const TrialRecord> records) {
    os << kTrialCsvHeader << '\n';
    for (const auto& r : records) {
        os << r.trial_id << ',' << scenario_id << ',' << r.alice_setting << ',' << r.bob_setting << ','
           << r.alice_outcome << ',' << r.bob_outcome << ',' << (r.vicky_tag ? to_string(*r.vicky_tag) : "") << '\n';
    }
}

struct TrialCsv {
    std::string scenario_id;
    std::vector<TrialRecord> records;
};

inline TrialCsv read_trial_csv(std::istream& in) {
    detail::expect_header(in, kTrialCsvHeader);
    TrialCsv out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 7) throw InvalidInput("trial CSV row needs 7 fields: " + line);
        if (out.records.empty())
            out.scenario_id = f[1];
        else if (f[1] != out.scenario_id)
            throw InvalidInput("trial CSV mixes scenario ids");
        TrialRecord r;
        r.trial_id = detail::parse_number<std::uint64_t>(f[0], "trial_id");
        r.alice_setting = detail::parse_number<int>(f[2], "alice_setting");
        r.bob_setting = detail::parse_number<int>(f[3], "bob_setting");
        r.alice_outcome = detail::parse_number<int>(f[4], "alice_outcome");
        r.bob_outcome = detail::parse_number<int>(f[5], "bob_outcome");
        if (!f[6].empty()) {
            r.vicky_tag = parse_vicky_tag(f[6]);
            if (!r.vicky_tag) throw InvalidInput("unknown vicky_tag '" + f[6] + "'");
        }
        r.validate();
        out.records.push_back(r);
    }
    return out;
}

inline constexpr std::string_view kDiscardedLabel = "discarded";

/// Rows in trial_id order, labeled with their subensemble or "discarded".
inline void write_coin_csv(std::ostream& os, const ClassicalSubensembles& sel) {
    std::vector<std::pair<CoinTrial, std::string_view>> rows;
    for (const auto& [label, trials] : sel.subensembles)
        for (const auto& t : trials) rows.emplace_back(t, to_string(label));
    for (const auto& t : sel.discarded) rows.emplace_back(t, kDiscardedLabel);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.trial_id < b.first.trial_id; });
    os << kCoinCsvHeader << '\n';
    for (const auto& [t, label] : rows)
        os << t.trial_id << ',' << t.alice_coin << ',' << t.bob_coin << ',' << t.alice_face << ',' << t.bob_face << ','
           << label << '\n';
}

inline ClassicalSubensembles read_coin_csv(std::istream& in) {
    detail::expect_header(in, kCoinCsvHeader);
    ClassicalSubensembles out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 6) throw InvalidInput("coin CSV row needs 6 fields: " + line);
        CoinTrial t;
        t.trial_id = detail::parse_number<std::uint64_t>(f[0], "trial_id");
        t.alice_coin = detail::parse_number<int>(f[1], "alice_coin");
        t.bob_coin = detail::parse_number<int>(f[2], "bob_coin");
        t.alice_face = detail::parse_number<int>(f[3], "alice_face");
        t.bob_face = detail::parse_number<int>(f[4], "bob_face");
        TrialRecord{t.trial_id, t.alice_coin, t.bob_coin, t.alice_face, t.bob_face, {}}.validate();
        if (f[5] == kDiscardedLabel) {
            out.discarded.push_back(t);
        } else {
            const auto label = parse_subensemble_label(f[5]);
            if (!label) throw InvalidInput("unknown subensemble label '" + f[5] + "'");
            out.subensembles[*label].push_back(t);
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// Configs
// --------------------------------------------------------------------------

inline Scenario parse_scenario(std::string_view s) {
    for (Scenario sc : {Scenario::reverse, Scenario::swap, Scenario::parity})
        if (to_string(sc) == s) return sc;
    throw InvalidInput("unknown scenario '" + std::string(s) + "'");
}

inline Party parse_party(std::string_view s) {
    for (Party p : {Party::alice, Party::bob, Party::vicky})
        if (to_string(p) == s) return p;
    throw InvalidInput("unknown party '" + std::string(s) + "'");
}

/// Keys: scenario, trials, seed, angles {alice: [a1, a2], bob: [b1, b2]}
/// in radians, setting_policy [p11, p12, p21, p22], order [party x3] or
/// "vicky_first" / "ab_first". Missing keys keep their defaults.
inline ScenarioConfig parse_scenario_config(const json& j) {
    ScenarioConfig c;
    try {
        if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario").get<std::string>());
        if (j.contains("trials")) c.trials = j.at("trials").get<std::uint64_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("angles")) {
            const auto& a = j.at("angles");
            for (std::size_t k = 0; k < 2; ++k) {
                c.angles.alice[k] = Angle::from_radians(a.at("alice").at(k).get<double>());
                c.angles.bob[k] = Angle::from_radians(a.at("bob").at(k).get<double>());
            }
        }
        if (j.contains("setting_policy"))
            for (std::size_t k = 0; k < 4; ++k) c.setting_policy.p[k] = j.at("setting_policy").at(k).get<double>();
        if (j.contains("order")) {
            const auto& o = j.at("order");
            if (o.is_string()) {
                const auto s = o.get<std::string>();
                if (s == "vicky_first")
                    c.order = kVickyFirst;
                else if (s == "ab_first")
                    c.order = kAbFirst;
                else
                    throw InvalidInput("order must be vicky_first, ab_first, or a list of parties");
            } else {
                for (std::size_t k = 0; k < 3; ++k) c.order[k] = parse_party(o.at(k).get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad scenario config: ") + e.what());
    }
    c.validate();
    return c;
}

inline json to_json(const ExperimentAngles& a) {
    return {{"alice", {a.alice[0].radians(), a.alice[1].radians()}}, {"bob", {a.bob[0].radians(), a.bob[1].radians()}}};
}

inline json to_json(const ScenarioConfig& c) {
    json order = json::array();
    for (Party p : c.order) order.push_back(std::string(to_string(p)));
    return {{"scenario", std::string(to_string(c.scenario))},
            {"trials", c.trials},
            {"seed", c.seed},
            {"angles", to_json(c.angles)},
            {"setting_policy", c.setting_policy.p},
            {"order", order}};
}

// --------------------------------------------------------------------------
// Event sets
// --------------------------------------------------------------------------

/// {"events": [{"label": "Vicky", "t": 0, "x": 0, "y": 0, "t_end": 1}, ...]}
/// with y and t_end optional. A bare array is accepted too.
inline std::vector<SpacetimeEvent> parse_events(const json& j) {
    std::vector<SpacetimeEvent> out;
    try {
        const json& arr = j.is_array() ? j : j.at("events");
        for (const auto& e : arr) {
            SpacetimeEvent ev;
            const auto label = parse_event_label(e.at("label").get<std::string>());
            if (!label) throw InvalidInput("unknown event label " + e.at("label").dump());
            ev.label = *label;
            ev.t = e.at("t").get<double>();
            ev.x = e.at("x").get<double>();
            if (e.contains("y")) ev.y = e.at("y").get<double>();
            if (e.contains("t_end") && !e.at("t_end").is_null()) ev.t_end = e.at("t_end").get<double>();
            ev.validate();
            out.push_back(ev);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad event set: ") + e.what());
    }
    return out;
}

inline json to_json(std::span<const SpacetimeEvent> events) {
    json arr = json::array();
    for (const auto& e : events) {
        json o = {{"label", std::string(to_string(e.label))}, {"t", e.t}, {"x", e.x}, {"y", e.y}};
        if (e.t_end) o["t_end"] = *e.t_end;
        arr.push_back(o);
    }
    return {{"events", arr}};
}

inline json to_json(const Foliation& f) {
    return {{"rapidity", f.rapidity()}, {"direction", f.direction()}, {"vx", f.vx()}, {"vy", f.vy()}};
}

inline json to_json(const Permutation& p) {
    json a = json::array();
    for (EventLabel l : p) a.push_back(std::string(to_string(l)));
    return a;
}

inline json to_json(const Ordering& o) {
    json a = json::array();
    for (const auto& g : o) {
        json group = json::array();
        for (EventLabel l : g) group.push_back(std::string(to_string(l)));
        a.push_back(group);
    }
    return a;
}

}  // namespace rbell::io
