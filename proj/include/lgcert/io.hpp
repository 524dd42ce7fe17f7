#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgcert/certification.hpp"
#include "lgcert/optimizer.hpp"
#include "lgcert/qubit_core.hpp"
#include "lgcert/settings.hpp"
#include "lgcert/simulator.hpp"

// Wire formats. All JSON documents carry schema_version; CSV numbers are
// printed with six significant digits so regenerated files diff cleanly.

namespace lgcert::io {

inline constexpr int schema_version = 1;

/// Six-significant-digit numeric formatting used in every CSV emitted.
inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Strategy: flat JSON object, keys nx ny nz x1 y1 z1 x2 y2 z2 a b.
// ---------------------------------------------------------------------------

inline nlohmann::json strategy_to_json(const Strategy& s) {
    return {{"nx", s.state.nx}, {"ny", s.state.ny}, {"nz", s.state.nz},
            {"x1", s.u1.x},     {"y1", s.u1.y},     {"z1", s.u1.z},
            {"x2", s.u2.x},     {"y2", s.u2.y},     {"z2", s.u2.z},
            {"a", s.povm.a},    {"b", s.povm.b}};
}

inline Strategy strategy_from_json(const nlohmann::json& j) {
    Strategy s;
    s.state = BlochVector(j.at("nx").get<double>(), j.at("ny").get<double>(),
                          j.at("nz").get<double>());
    s.u1 = UnitaryParams(j.at("x1").get<double>(), j.at("y1").get<double>(),
                         j.at("z1").get<double>());
    s.u2 = UnitaryParams(j.at("x2").get<double>(), j.at("y2").get<double>(),
                         j.at("z2").get<double>());
    s.povm = PovmParams(j.at("a").get<double>(), j.at("b").get<double>());
    return s;
}

inline Strategy load_strategy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open strategy file: " + path);
    nlohmann::json j;
    in >> j;
    return strategy_from_json(j);
}

// ---------------------------------------------------------------------------
// Trials: one JSON object per line {"i":..,"x":..,"y":..,"a":..|null,"b":..}.
// ---------------------------------------------------------------------------

inline std::string trial_to_jsonl(const TrialRecord& t) {
    std::ostringstream os;
    os << "{\"i\":" << t.index << ",\"x\":" << t.x << ",\"y\":" << t.y << ",\"a\":";
    if (t.a)
        os << *t.a;
    else
        os << "null";
    os << ",\"b\":" << t.b << "}";
    return os.str();
}

inline TrialRecord trial_from_json_line(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("trial line " + std::to_string(line_no) +
                                 ": malformed JSON (" + e.what() + ")");
    }
    try {
        TrialRecord t;
        t.index = j.at("i").get<std::uint64_t>();
        t.x = j.at("x").get<int>();
        t.y = j.at("y").get<int>();
        if (!j.at("a").is_null()) t.a = j.at("a").get<int>();
        t.b = j.at("b").get<int>();
        t.validate();
        return t;
    } catch (const std::exception& e) {
        throw std::runtime_error("trial line " + std::to_string(line_no) + ": " + e.what());
    }
}

inline void write_trials(const std::string& path, std::span<const TrialRecord> trials) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trials file: " + path);
    for (const TrialRecord& t : trials) out << trial_to_jsonl(t) << "\n";
}

inline std::vector<TrialRecord> read_trials(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trials file: " + path);
    std::vector<TrialRecord> trials;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        trials.push_back(trial_from_json_line(line, line_no));
    }
    return trials;
}

// ---------------------------------------------------------------------------
// Reports and results
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const CertificationReport& r) {
    nlohmann::json j{{"schema_version", schema_version},
                     {"n", r.n},
                     {"q", r.q},
                     {"delta", r.delta},
                     {"I_hat", r.I_hat},
                     {"epsilon", r.epsilon},
                     {"alpha_eff", r.alpha_eff},
                     {"mode", to_string(r.mode)},
                     {"bits_per_round", r.bits_per_round},
                     {"total_bits", r.total_bits},
                     {"nsit_epsilon", r.nsit_epsilon},
                     {"Iq", r.Iq}};
    if (r.nsit_hat)
        j["nsit_hat"] = *r.nsit_hat;
    else
        j["nsit_hat"] = nullptr;
    return j;
}

inline nlohmann::json opt_result_to_json(const OptResult& r, double alpha, double v,
                                         EntropyMode mode) {
    return {{"schema_version", schema_version},
            {"alpha", alpha},
            {"v", v},
            {"mode", to_string(mode)},
            {"best_value", r.best_value},
            {"bits", r.best_value > 0.0 ? -std::log2(r.best_value) : 0.0},
            {"residuals", r.residuals},
            {"restarts_used", r.restarts_used},
            {"converged", r.converged},
            {"best_strategy", strategy_to_json(r.best_strategy)}};
}

// ---------------------------------------------------------------------------
// Bit files: bits_x{X}_y{Y}_a{A}.txt of ASCII '0'/'1' plus a JSON manifest
// with per-group lengths and the configured rate.
// ---------------------------------------------------------------------------

inline std::string bit_group_filename(int x, int y, int a) {
    return "bits_x" + std::to_string(x) + "_y" + std::to_string(y) + "_a" +
           std::to_string(a) + ".txt";
}

inline nlohmann::json write_bit_output(const BitOutput& bits, const std::string& dir) {
    nlohmann::json manifest{{"schema_version", schema_version},
                            {"total_bits", bits.total_bits},
                            {"rounds_per_second", bits.rounds_per_second},
                            {"bits_per_second", bits.bits_per_second()},
                            {"groups", nlohmann::json::array()}};
    for (const BitOutput::Group& g : bits.groups) {
        const std::string name = bit_group_filename(g.x, g.y, g.a);
        std::ofstream out(dir + "/" + name);
        if (!out) throw std::runtime_error("cannot write bit file: " + dir + "/" + name);
        out << g.bits;
        manifest["groups"].push_back({{"file", name},
                                      {"x", g.x},
                                      {"y", g.y},
                                      {"a", g.a},
                                      {"length", g.bits.size()}});
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// CSV rows
// ---------------------------------------------------------------------------

inline std::string bound_curve_csv(std::span<const BoundRow> rows) {
    std::string out = "alpha,bits,mode\n";
    for (const BoundRow& r : rows)
        out += fmt6(r.alpha) + "," + fmt6(r.bits) + "," + to_string(r.mode) + "\n";
    return out;
}

inline std::string nsit_curve_csv(std::span<const NsitCurveRow> rows) {
    std::string out = "alpha,v,bits,converged\n";
    for (const NsitCurveRow& r : rows)
        out += fmt6(r.alpha) + "," + fmt6(r.v) + "," + fmt6(r.bits) + "," +
               (r.converged ? "1" : "0") + "\n";
    return out;
}

inline std::string memory_curve_csv(std::span<const MemoryCurveRow> rows) {
    std::string out = "n,total_bits,mode\n";
    for (const MemoryCurveRow& r : rows)
        out += std::to_string(r.n) + "," + std::to_string(r.total_bits) + "," +
               to_string(r.mode) + "\n";
    return out;
}

} // namespace lgcert::io
