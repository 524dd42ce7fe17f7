// lgcert: reproducible workflows around the three-time Leggett-Garg
// randomness toolkit. Every command is fully determined by its flags plus
// the seed; primary outputs are byte-stable across reruns.
//
// Exit codes: 0 success, 1 usage, 2 non-convergence / threshold not met,
// 3 I/O failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgcert/certification.hpp"
#include "lgcert/io.hpp"
#include "lgcert/optimizer.hpp"
#include "lgcert/simulator.hpp"

namespace {

using namespace lgcert;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_threshold = 2;
constexpr int exit_io = 3;

double parse_fraction(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

/// "uniform" or "biased:p12,p13,p23" (fractions allowed), plus audit mass.
SettingsDistribution parse_dist(const std::string& spec, double audit_mass) {
    SettingsDistribution base;
    if (spec == "uniform") {
        base = SettingsDistribution::uniform_pairs();
    } else if (spec.rfind("biased:", 0) == 0) {
        const std::string rest = spec.substr(7);
        std::vector<double> parts;
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            parts.push_back(parse_fraction(
                rest.substr(pos, comma == std::string::npos ? comma : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (parts.size() != 3)
            throw CLI::ValidationError("--dist", "biased form needs p12,p13,p23");
        base = SettingsDistribution::pairs(parts[0], parts[1], parts[2]);
    } else {
        throw CLI::ValidationError("--dist", "expected 'uniform' or 'biased:p12,p13,p23'");
    }
    return audit_mass > 0.0 ? SettingsDistribution::with_audit(base, audit_mass) : base;
}

/// "start:stop:step" inclusive arithmetic grid.
std::vector<double> parse_grid(const std::string& s) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
        throw CLI::ValidationError("--grid", "expected start:stop:step with step > 0");
    std::vector<double> grid;
    for (double v = start; v <= stop + 1e-12; v += step) grid.push_back(v);
    return grid;
}

/// "start:stop:points" geometric grid of distinct integers.
std::vector<std::uint64_t> parse_n_grid(const std::string& s) {
    double start = 0, stop = 0;
    int points = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d", &start, &stop, &points) != 3 || start < 1 ||
        stop < start || points < 2)
        throw CLI::ValidationError("--n-grid", "expected start:stop:points");
    std::vector<std::uint64_t> grid;
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        const auto n = static_cast<std::uint64_t>(
            std::llround(start * std::pow(stop / start, f)));
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

EntropyMode parse_mode(const std::string& m) {
    if (m == "joint") return EntropyMode::joint;
    if (m == "conditional") return EntropyMode::conditional;
    throw CLI::ValidationError("--mode", "expected 'joint' or 'conditional'");
}

/// "12:+-" means pair (1,2), first outcome +1, second outcome -1.
OutcomeTarget parse_target(const std::string& s) {
    if (s.size() == 5 && s[2] == ':' && (s[3] == '+' || s[3] == '-') &&
        (s[4] == '+' || s[4] == '-')) {
        const std::string pair = s.substr(0, 2);
        Pair p;
        if (pair == "12") p = Pair::q12;
        else if (pair == "13") p = Pair::q13;
        else if (pair == "23") p = Pair::q23;
        else throw CLI::ValidationError("--target", "pair must be 12, 13 or 23");
        return {p, s[3] == '+' ? +1 : -1, s[4] == '+' ? +1 : -1};
    }
    throw CLI::ValidationError("--target", "expected PAIR:AB, e.g. 13:+-");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

struct CertifyInputs {
    double I_hat;
    std::uint64_t n;
    std::optional<std::array<double, 3>> nsit_hat;
};

CertifyInputs certify_inputs_from_trials(const std::string& path,
                                         const SettingsDistribution& dist) {
    const std::vector<TrialRecord> trials = io::read_trials(path);
    const EstimatorSpec spec = default_estimator(dist);
    CertifyInputs in{lgi_estimate(trials, spec), trials.size(), std::nullopt};
    bool has_audit = false;
    for (const TrialRecord& t : trials)
        if (t.x == 0) {
            has_audit = true;
            break;
        }
    if (has_audit) in.nsit_hat = nsit_estimates(trials, spec);
    return in;
}

// ---------------------------------------------------------------------------
// repro-paper: regenerate every figure-level curve and headline number,
// checking each against its expected value.
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double got;
    double expected;
    double tol;
    bool pass() const { return std::abs(got - expected) <= tol; }
};

int run_repro(const std::string& out_dir, int restarts, std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    SolverOptions opts;
    opts.restarts = restarts;
    std::vector<Check> checks;

    // Analytic bound curves (alpha = 0 kept as the limit row).
    const std::vector<double> fine = parse_grid("0:0.5:0.01");
    write_text(out_dir + "/bound_joint.csv",
               io::bound_curve_csv(bound_curve(fine, EntropyMode::joint)));
    write_text(out_dir + "/bound_conditional.csv",
               io::bound_curve_csv(bound_curve(fine, EntropyMode::conditional)));
    checks.push_back({"entropy_joint(0.5)", entropy_joint(Alpha(0.5)), 1.415, 0.005});
    checks.push_back(
        {"entropy_conditional(0.5)", entropy_conditional(Alpha(0.5)), 0.415, 0.005});

    // Numerical verification dots for both objectives.
    const std::vector<double> coarse = parse_grid("0.05:0.5:0.05");
    for (EntropyMode mode : {EntropyMode::joint, EntropyMode::conditional}) {
        std::vector<NsitCurveRow> rows;
        double worst = 0.0;
        std::uint64_t cell = 0;
        for (double a : coarse) {
            const OptResult r = maximize(OptProblem(Alpha(a), 0.0, mode), opts,
                                         rng::at(seed, cell++, 7));
            const double target = mode == EntropyMode::joint
                                      ? pstar_joint(Alpha(a))
                                      : pstar_conditional(Alpha(a));
            worst = std::max(worst, std::abs(r.best_value - target));
            rows.push_back({a, 0.0, r.best_value > 0 ? -std::log2(r.best_value) : 0.0,
                            r.converged});
        }
        const std::string name = mode == EntropyMode::joint ? "joint" : "conditional";
        write_text(out_dir + "/optimize_" + name + ".csv", io::nsit_curve_csv(rows));
        checks.push_back({"optimizer vs bound (" + name + ", max |dev|)", worst, 0.0, 2e-3});
    }

    // Randomness against relaxed NSIT.
    const std::vector<double> alphas = parse_grid("0.1:0.5:0.1");
    const std::vector<double> vs{0.0, 0.01, 0.02, 0.05};
    const auto relaxed = randomness_vs_nsit_curve(alphas, vs, seed, opts);
    write_text(out_dir + "/nsit_relaxation.csv", io::nsit_curve_csv(relaxed));
    double worst_v0 = 0.0;
    double bits_half_relaxed = 0.0;
    for (const auto& row : relaxed) {
        if (row.v == 0.0)
            worst_v0 = std::max(worst_v0,
                                std::abs(row.bits - entropy_conditional(Alpha(row.alpha))));
        if (row.alpha == 0.5 && row.v == 0.05) bits_half_relaxed = row.bits;
    }
    checks.push_back({"relaxed curve v=0 column (max |dev|)", worst_v0, 0.0, 2e-3});
    checks.push_back({"bits(alpha=0.5, v=0.05) > 0", bits_half_relaxed > 0.0 ? 1.0 : 0.0,
                      1.0, 0.0});

    // Memory-effect curves and headline bit counts.
    const SettingsDistribution uniform = SettingsDistribution::uniform_pairs();
    const SettingsDistribution biased =
        SettingsDistribution::pairs(1.0 / 6.0, 5.0 / 12.0, 5.0 / 12.0);
    const auto ns = parse_n_grid("100:1000000:41");
    write_text(out_dir + "/memory_uniform.csv",
               io::memory_curve_csv(memory_curve(1.31, 0.01, uniform, ns).rows));
    write_text(out_dir + "/memory_biased.csv",
               io::memory_curve_csv(memory_curve(1.31, 0.01, biased, ns).rows));
    write_text(out_dir + "/memory_none.csv",
               io::memory_curve_csv(
                   memory_curve(1.31, 0.01, uniform, ns, EntropyMode::conditional, false).rows));

    checks.push_back({"certify uniform (bits)",
                      static_cast<double>(certify(1.31, 100000, uniform, 0.01).total_bits),
                      3673.0, 2.0});
    checks.push_back({"certify biased (bits)",
                      static_cast<double>(certify(1.31, 100000, biased, 0.01).total_bits),
                      2777.0, 2.0});
    checks.push_back({"no-memory rate (bits/round)",
                      certify(1.31, 100000, uniform, 0.01, EntropyMode::conditional, false)
                          .bits_per_round,
                      0.05406, 1e-4});

    // NSIT deviation audit.
    std::string audit_csv = "n,eps1,eps2,eps3\n";
    for (std::uint64_t n : ns) {
        const auto eps = nsit_deviation(n, 0.01);
        audit_csv += std::to_string(n) + "," + io::fmt6(eps[0]) + "," + io::fmt6(eps[1]) +
                     "," + io::fmt6(eps[2]) + "\n";
    }
    write_text(out_dir + "/nsit_audit.csv", audit_csv);
    checks.push_back(
        {"nsit deviation at n=1e5", nsit_deviation(100000, 0.01)[0], 0.0144, 1e-4});

    // End-to-end pipeline: simulate, estimate, certify.
    const SettingsDistribution audited = SettingsDistribution::with_audit(uniform, 0.1);
    const auto trials = sample_trials(
        DriftSchedule::fixed(canonical_strategy(Alpha(0.31))), audited, 1000000, seed + 11);
    const EstimatorSpec spec = default_estimator(audited);
    const double I_hat = lgi_estimate(trials, spec);
    const auto measured = certify(I_hat, trials.size(), audited, 0.01);
    const auto reference = certify(1.31, trials.size(), audited, 0.01);
    checks.push_back({"pipeline bits vs reference (rel dev)",
                      std::abs(static_cast<double>(measured.total_bits) -
                               static_cast<double>(reference.total_bits)) /
                          static_cast<double>(reference.total_bits),
                      0.0, 0.05});
    const auto nsit_hat = nsit_estimates(trials, spec);
    for (int j = 0; j < 3; ++j)
        checks.push_back({"pipeline NSIT_" + std::to_string(j + 1) + " estimate",
                          nsit_hat[static_cast<std::size_t>(j)], 0.0, 0.005});

    // Summary.
    std::string summary = "check,got,expected,tolerance,pass\n";
    bool all_pass = true;
    for (const Check& c : checks) {
        summary += c.name + "," + io::fmt6(c.got) + "," + io::fmt6(c.expected) + "," +
                   io::fmt6(c.tol) + "," + (c.pass() ? "1" : "0") + "\n";
        std::cout << (c.pass() ? "[PASS] " : "[FAIL] ") << c.name << ": got " << c.got
                  << " (expected " << c.expected << " +- " << c.tol << ")\n";
        all_pass = all_pass && c.pass();
    }
    write_text(out_dir + "/summary.csv", summary);
    std::cout << (all_pass ? "repro-paper: all checks passed\n"
                           : "repro-paper: CHECKS FAILED\n");
    return all_pass ? exit_ok : exit_threshold;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-time Leggett-Garg certified-randomness toolkit"};
    app.require_subcommand(1);

    // --- bound ---------------------------------------------------------
    auto* bound = app.add_subcommand("bound", "Tabulate the analytic entropy bound");
    double bound_alpha = -1.0;
    std::string bound_grid, bound_mode = "joint", bound_out, bound_format = "csv";
    bound->add_option("--alpha", bound_alpha, "Single LGI excess alpha in (0, 0.5]");
    bound->add_option("--grid", bound_grid, "Alpha grid start:stop:step (0 allowed as limit row)");
    bound->add_option("--mode", bound_mode, "joint or conditional")->capture_default_str();
    bound->add_option("--format", bound_format, "csv or json")->capture_default_str();
    bound->add_option("--out", bound_out, "Write the table here instead of stdout");

    // --- optimize ------------------------------------------------------
    auto* opt = app.add_subcommand("optimize", "Constrained maximization of outcome probabilities");
    double opt_alpha = 0.5, opt_v = 0.0;
    std::string opt_mode = "joint", opt_alpha_grid, opt_v_grid, opt_json, opt_csv, opt_target;
    int opt_restarts = 64;
    std::uint64_t opt_seed = 0;
    opt->add_option("--alpha", opt_alpha, "LGI excess alpha in (0, 0.5]")->capture_default_str();
    opt->add_option("--v", opt_v, "NSIT tolerance v in [0, 0.5)")->capture_default_str();
    opt->add_option("--mode", opt_mode, "joint or conditional")->capture_default_str();
    opt->add_option("--target", opt_target,
                    "Maximize one outcome only, PAIR:AB (e.g. 13:+-); default is max over all");
    opt->add_option("--alpha-grid", opt_alpha_grid, "Curve mode: alpha grid start:stop:step");
    opt->add_option("--v-grid", opt_v_grid, "Curve mode: v grid start:stop:step");
    opt->add_option("--restarts", opt_restarts, "Multi-start count")->capture_default_str();
    opt->add_option("--seed", opt_seed, "Master seed")->capture_default_str();
    opt->add_option("--json", opt_json, "Write the OptResult JSON here");
    opt->add_option("--out", opt_csv, "Write the CSV row(s) here instead of stdout");

    // --- simulate ------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Sample a reproducible trial stream");
    std::string sim_strategy, sim_dist = "uniform", sim_out = "trials.jsonl", sim_drift,
                sim_bits_dir;
    double sim_canonical_alpha = -1.0, sim_audit = 0.0, sim_rate = 3865.0;
    std::uint64_t sim_n = 100000, sim_seed = 0;
    sim->add_option("--strategy", sim_strategy, "Strategy JSON file");
    sim->add_option("--canonical-alpha", sim_canonical_alpha,
                    "Use the canonical strategy for this alpha");
    sim->add_option("--dist", sim_dist, "uniform or biased:p12,p13,p23")->capture_default_str();
    sim->add_option("--audit", sim_audit,
                    "Mass on the x=0 NSIT-audit settings (e.g. 0.1)")->capture_default_str();
    sim->add_option("--n", sim_n, "Number of rounds")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Trials JSONL path")->capture_default_str();
    sim->add_option("--drift", sim_drift, "param:amplitude:period sinusoidal drift (param one of nx ny nz x1 y1 z1 x2 y2 z2 a b)");
    sim->add_option("--bits", sim_bits_dir, "Also write per-configuration bit files here");
    sim->add_option("--rate", sim_rate, "Rounds per second for rate reporting")
        ->capture_default_str();

    // --- certify -------------------------------------------------------
    auto* cert = app.add_subcommand("certify", "Certified min-entropy accounting");
    std::string cert_trials, cert_dist = "uniform", cert_mode = "conditional", cert_out;
    double cert_I = -10.0, cert_delta = 0.01, cert_audit = 0.0;
    std::uint64_t cert_n = 100000;
    bool cert_no_memory = false;
    cert->add_option("--trials", cert_trials, "Trials JSONL file (estimates I_hat and NSIT)");
    cert->add_option("--I", cert_I, "Observed LGI value (alternative to --trials)");
    cert->add_option("--n", cert_n, "Rounds (with --I)")->capture_default_str();
    cert->add_option("--delta", cert_delta, "Failure probability")->capture_default_str();
    cert->add_option("--dist", cert_dist, "uniform or biased:p12,p13,p23")->capture_default_str();
    cert->add_option("--audit", cert_audit, "Audit mass used when sampling")->capture_default_str();
    cert->add_option("--mode", cert_mode, "joint or conditional")->capture_default_str();
    cert->add_flag("--no-memory", cert_no_memory, "Drop the martingale radius (epsilon = 0)");
    cert->add_option("--out", cert_out, "Write the report JSON here");

    // --- memory-curve ----------------------------------------------------
    auto* mem = app.add_subcommand("memory-curve", "Certified bits as a function of rounds");
    std::string mem_dist = "uniform", mem_mode = "conditional", mem_grid = "100:1000000:41",
                mem_out;
    double mem_I = 1.31, mem_delta = 0.01, mem_audit = 0.0;
    bool mem_no_memory = false;
    mem->add_option("--I", mem_I, "Observed LGI value")->capture_default_str();
    mem->add_option("--delta", mem_delta, "Failure probability")->capture_default_str();
    mem->add_option("--dist", mem_dist, "uniform or biased:p12,p13,p23")->capture_default_str();
    mem->add_option("--audit", mem_audit, "Audit mass")->capture_default_str();
    mem->add_option("--mode", mem_mode, "joint or conditional")->capture_default_str();
    mem->add_option("--n-grid", mem_grid, "start:stop:points geometric grid")
        ->capture_default_str();
    mem->add_flag("--no-memory", mem_no_memory, "Drop the martingale radius");
    mem->add_option("--out", mem_out, "Write CSV here instead of stdout");

    // --- nsit-audit ------------------------------------------------------
    auto* audit = app.add_subcommand("nsit-audit", "NSIT deviation radii under memory effects");
    std::string audit_grid = "100:1000000:41", audit_out;
    double audit_delta = 0.01;
    std::uint64_t audit_n = 0;
    audit->add_option("--n", audit_n, "Single n (overrides --n-grid)");
    audit->add_option("--n-grid", audit_grid, "start:stop:points geometric grid")
        ->capture_default_str();
    audit->add_option("--delta", audit_delta, "Failure probability")->capture_default_str();
    audit->add_option("--out", audit_out, "Write CSV here instead of stdout");

    // --- repro-paper -----------------------------------------------------
    auto* repro = app.add_subcommand("repro-paper",
                                     "Regenerate every figure-level curve and headline number");
    std::string repro_out = "repro_out";
    int repro_restarts = 24;
    std::uint64_t repro_seed = 0;
    repro->add_option("--out", repro_out, "Output directory")->capture_default_str();
    repro->add_option("--restarts", repro_restarts, "Optimizer restarts")->capture_default_str();
    repro->add_option("--seed", repro_seed, "Master seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*bound) {
            std::vector<double> grid;
            if (!bound_grid.empty())
                grid = parse_grid(bound_grid);
            else if (bound_alpha >= 0.0)
                grid = {bound_alpha};
            else
                throw CLI::ValidationError("bound", "need --alpha or --grid");
            const auto rows = bound_curve(grid, parse_mode(bound_mode));
            std::string text;
            if (bound_format == "json") {
                nlohmann::json j{{"schema_version", io::schema_version},
                                 {"rows", nlohmann::json::array()}};
                for (const BoundRow& r : rows)
                    j["rows"].push_back(
                        {{"alpha", r.alpha}, {"bits", r.bits}, {"mode", to_string(r.mode)}});
                text = j.dump(2) + "\n";
            } else if (bound_format == "csv") {
                text = io::bound_curve_csv(rows);
            } else {
                throw CLI::ValidationError("--format", "expected 'csv' or 'json'");
            }
            if (bound_out.empty())
                std::cout << text;
            else
                write_text(bound_out, text);
            return exit_ok;
        }

        if (*opt) {
            SolverOptions opts;
            opts.restarts = opt_restarts;
            const EntropyMode mode = parse_mode(opt_mode);
            if (!opt_alpha_grid.empty()) {
                const auto alphas = parse_grid(opt_alpha_grid);
                const auto vvals =
                    opt_v_grid.empty() ? std::vector<double>{opt_v} : parse_grid(opt_v_grid);
                const auto rows = randomness_vs_nsit_curve(alphas, vvals, opt_seed, opts);
                const std::string csv = io::nsit_curve_csv(rows);
                if (opt_csv.empty())
                    std::cout << csv;
                else
                    write_text(opt_csv, csv);
                for (const auto& row : rows)
                    if (!row.converged) return exit_threshold;
                return exit_ok;
            }
            std::optional<OutcomeTarget> target;
            if (!opt_target.empty()) target = parse_target(opt_target);
            const OptResult r = maximize(OptProblem(Alpha(opt_alpha), opt_v, mode, target),
                                         opts, opt_seed);
            const nlohmann::json j = io::opt_result_to_json(r, opt_alpha, opt_v, mode);
            if (!opt_json.empty()) write_text(opt_json, j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            const NsitCurveRow row{opt_alpha, opt_v,
                                   r.best_value > 0 ? -std::log2(r.best_value) : 0.0,
                                   r.converged};
            const std::string csv = io::nsit_curve_csv(std::span(&row, 1));
            if (!opt_csv.empty()) write_text(opt_csv, csv);
            return r.converged ? exit_ok : exit_threshold;
        }

        if (*sim) {
            Strategy s;
            if (!sim_strategy.empty())
                s = io::load_strategy(sim_strategy);
            else if (sim_canonical_alpha > 0.0)
                s = canonical_strategy(Alpha(sim_canonical_alpha));
            else
                throw CLI::ValidationError("simulate", "need --strategy or --canonical-alpha");
            const SettingsDistribution dist = parse_dist(sim_dist, sim_audit);

            DriftSchedule sched = DriftSchedule::fixed(s);
            if (!sim_drift.empty()) {
                char name[8]{};
                double amp = 0, period = 0;
                if (std::sscanf(sim_drift.c_str(), "%7[a-z0-9]:%lf:%lf", name, &amp, &period) !=
                        3 ||
                    period <= 0)
                    throw CLI::ValidationError("--drift", "expected param:amplitude:period");
                const std::string pname(name);
                const std::map<std::string, DriftParam> params{
                    {"nx", DriftParam::nx}, {"ny", DriftParam::ny}, {"nz", DriftParam::nz},
                    {"x1", DriftParam::x1}, {"y1", DriftParam::y1}, {"z1", DriftParam::z1},
                    {"x2", DriftParam::x2}, {"y2", DriftParam::y2}, {"z2", DriftParam::z2},
                    {"a", DriftParam::a},   {"b", DriftParam::b}};
                const auto it = params.find(pname);
                if (it == params.end())
                    throw CLI::ValidationError("--drift", "unknown parameter " + pname);
                sched.param = it->second;
                sched.amplitude = amp;
                sched.period = period;
            }

            const auto trials = sample_trials(sched, dist, sim_n, sim_seed);
            io::write_trials(sim_out, trials);

            nlohmann::json manifest{{"schema_version", io::schema_version},
                                    {"n", sim_n},
                                    {"seed", sim_seed},
                                    {"dist", dist.p},
                                    {"strategy", io::strategy_to_json(s)},
                                    {"trials_file", sim_out}};
            if (!sim_bits_dir.empty()) {
                std::filesystem::create_directories(sim_bits_dir);
                const BitOutput bits = bits_from_trials(trials, sim_rate);
                manifest["bits"] = io::write_bit_output(bits, sim_bits_dir);
            }
            write_text(sim_out + ".manifest.json", manifest.dump(2) + "\n");
            std::cout << "wrote " << trials.size() << " trials to " << sim_out << "\n";
            return exit_ok;
        }

        if (*cert) {
            const SettingsDistribution dist = parse_dist(cert_dist, cert_audit);
            CertifyInputs in{cert_I, cert_n, std::nullopt};
            if (!cert_trials.empty()) in = certify_inputs_from_trials(cert_trials, dist);
            else if (cert_I < -3.0)
                throw CLI::ValidationError("certify", "need --trials or --I");
            CertificationReport r = certify(in.I_hat, in.n, dist, cert_delta,
                                            parse_mode(cert_mode), !cert_no_memory);
            r.nsit_hat = in.nsit_hat;
            const nlohmann::json j = io::report_to_json(r);
            if (!cert_out.empty()) write_text(cert_out, j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            std::cout << "total_bits " << r.total_bits << "\n";
            return r.total_bits > 0 ? exit_ok : exit_threshold;
        }

        if (*mem) {
            const auto grid = parse_n_grid(mem_grid);
            const MemoryCurve curve =
                memory_curve(mem_I, mem_delta, parse_dist(mem_dist, mem_audit), grid,
                             parse_mode(mem_mode), !mem_no_memory);
            const std::string csv = io::memory_curve_csv(curve.rows);
            if (mem_out.empty())
                std::cout << csv;
            else
                write_text(mem_out, csv);
            if (curve.first_positive_n)
                std::cout << "first_positive_n " << *curve.first_positive_n << "\n";
            return exit_ok;
        }

        if (*audit) {
            std::vector<std::uint64_t> grid;
            if (audit_n > 0)
                grid = {audit_n};
            else
                grid = parse_n_grid(audit_grid);
            std::string csv = "n,eps1,eps2,eps3\n";
            for (std::uint64_t n : grid) {
                const auto eps = nsit_deviation(n, audit_delta);
                csv += std::to_string(n) + "," + io::fmt6(eps[0]) + "," + io::fmt6(eps[1]) +
                       "," + io::fmt6(eps[2]) + "\n";
            }
            if (audit_out.empty())
                std::cout << csv;
            else
                write_text(audit_out, csv);
            return exit_ok;
        }

        if (*repro) return run_repro(repro_out, repro_restarts, repro_seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
