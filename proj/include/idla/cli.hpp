#pragma once

// Command-line front end: option parsing (flags mirror a flat key=value
// config file), subcommand dispatch, output files and run manifests.

#include <idla/acceptance.hpp>
#include <idla/experiments.hpp>
#include <idla/green.hpp>
#include <idla/lamplighter.hpp>
#include <idla/parallel.hpp>
#include <idla/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <map>
#include <string>
#include <vector>

namespace idla::cli {

enum ExitCode : int { ok = 0, usage = 1, runtime = 2, check_failed = 3 };

struct usage_error : error {
    using error::error;
};

/// Every flag of every subcommand. Unset optionals mean "subcommand default".
struct Options {
    std::string subcommand;
    std::string group = "tree";
    unsigned q = 3;
    std::size_t n_min = 1;
    std::size_t n_max = 10;
    std::uint64_t replicas = 1;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;  // 0: $IDLA_THREADS, else hardware concurrency
    bool check = false;
    std::uint64_t budget = kDefaultElementBudget;
    // green
    std::string source = "1";
    std::string target;
    std::uint64_t trials = 0;  // 0: exact only on trees, 10^4 otherwise
    // exit-test
    std::size_t n = 0;  // also N for boxes
    std::uint64_t samples = 100'000;
    std::uint64_t seeds = 1;
    // boxes
    std::uint64_t m = 3;
    // mouse
    std::size_t R = 0;
    std::optional<std::size_t> r;
    std::string A;
    std::string classes;
    // lower-bounds
    std::optional<double> c_outer;
    std::optional<double> c_inner;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"simulate", "lower-bounds", "green", "exit-test",
                                                "boxes",    "mouse",        "acceptance"};
    return names;
}

inline GroupKind parse_group(const std::string& name) {
    if (name == "tree") return GroupKind::involution_tree;
    if (name == "free") return GroupKind::free_group;
    if (name == "free-product") return GroupKind::free_product;
    if (name == "lamplighter") return GroupKind::lamplighter;
    throw usage_error("unknown group '" + name + "' (tree, free, free-product, lamplighter)");
}

/// Builds the option parser. Options live on the top-level app and fall
/// through from the subcommand, so the config file stays flat.
inline void describe(CLI::App& app, Options& o) {
    app.description("Internal DLA on trees and the lamplighter group");
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "flat key=value file; flags override its values");
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--group", o.group, "tree | free | free-product | lamplighter")->capture_default_str();
    app.add_option("--q", o.q, "tree degree (>= 3)")->capture_default_str();
    app.add_option("--n-min", o.n_min, "first checkpoint radius reported")->capture_default_str();
    app.add_option("--n-max", o.n_max, "last checkpoint radius")->capture_default_str();
    app.add_option("--replicas", o.replicas, "independent clusters")->capture_default_str();
    app.add_option("--seed", o.seed, "master seed")->capture_default_str();
    app.add_option("--out", o.out, "output directory");
    app.add_option("--threads", o.threads, std::string("worker threads (default $") + kThreadsEnv + ")");
    app.add_flag("--check", o.check, "evaluate acceptance checks on the result; exit 3 on failure");
    app.add_option("--budget", o.budget, "element budget for sphere and ball enumeration")->capture_default_str();
    app.add_option("--source", o.source, "green: source element")->capture_default_str();
    app.add_option("--target", o.target, "green: target element");
    app.add_option("--trials", o.trials, "Monte Carlo trials (green, boxes)");
    app.add_option("--n", o.n, "exit-test: radius index; boxes: number of balls")->capture_default_str();
    app.add_option("--samples", o.samples, "exit-test: samples per seed")->capture_default_str();
    app.add_option("--seeds", o.seeds, "exit-test: consecutive stream ids to test")->capture_default_str();
    app.add_option("--m", o.m, "boxes: number of boxes")->capture_default_str();
    app.add_option("--R", o.R, "mouse: sphere radius index")->capture_default_str();
    app.add_option("--r", o.r, "mouse: class half-radius");
    app.add_option("--A", o.A, "mouse: comma-separated boundary words");
    app.add_option("--classes", o.classes, "mouse: comma-separated class indices (needs --r)");
    app.add_option("--c-outer", o.c_outer, "lower-bounds: outer constant");
    app.add_option("--c-inner", o.c_inner, "lower-bounds: inner constant");
    static const std::map<std::string, std::string> blurb{
        {"simulate", "grow IDLA clusters, write per-radius fluctuations and fits"},
        {"lower-bounds", "test outer reach and inner coverage of simulated clusters"},
        {"green", "hitting probability, Green function and hitting distance"},
        {"exit-test", "uniformity of the ball exit point"},
        {"boxes", "P[no empty box] for balls in boxes, exact and bounded"},
        {"mouse", "greedy descent over boundary classes"},
        {"acceptance", "run the acceptance criteria"}};
    for (const auto& name : subcommands()) app.add_subcommand(name, blurb.at(name))->fallthrough();
}

inline void validate(const Options& o) {
    if (o.q < 3) throw usage_error("tree degree must be >= 3, got " + std::to_string(o.q));
    parse_group(o.group);
    if ((o.subcommand == "simulate" || o.subcommand == "lower-bounds") && o.out.empty())
        throw usage_error(o.subcommand + " needs --out");
    if ((o.subcommand == "simulate" || o.subcommand == "lower-bounds" || o.subcommand == "exit-test" ||
         o.subcommand == "mouse") &&
        o.group == "lamplighter")
        throw usage_error(o.subcommand + " needs a tree group");
    if (o.subcommand == "green" && o.target.empty()) throw usage_error("green needs --target");
    if (o.subcommand == "simulate" || o.subcommand == "lower-bounds") {
        if (o.replicas < 1) throw usage_error("replicas must be >= 1");
        if (o.n_min < 1) throw usage_error("n-min must be >= 1");
        if (o.n_max < o.n_min) throw usage_error("n-max must be >= n-min");
    }
    if (o.subcommand == "exit-test" && o.seeds < 1) throw usage_error("seeds must be >= 1");
    if (o.subcommand == "mouse" && !o.classes.empty() && !o.r) throw usage_error("--classes needs --r");
}

/// Parses argv (argv[0] is the program name). Throws usage_error; `--help`
/// and `--version` come back as CLI::Success via `help`.
inline Options parse_config(int argc, const char* const* argv, std::string* help = nullptr) {
    Options o;
    CLI::App app;
    describe(app, o);
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        if (help) *help = e.get_name() == "CallForVersion" ? std::string(kVersion) + "\n" : app.help();
        throw;
    } catch (const CLI::ParseError& e) {
        throw usage_error(e.what());
    }
    for (const auto* sub : app.get_subcommands()) o.subcommand = sub->get_name();
    validate(o);
    o.threads = resolve_threads(o.threads);
    return o;
}

/// Resolved configuration echoed into the manifest, in config-file key order.
inline nlohmann::ordered_json to_json(const Options& o) {
    nlohmann::ordered_json j;
    j["group"] = o.group;
    j["q"] = o.q;
    j["n-min"] = o.n_min;
    j["n-max"] = o.n_max;
    j["replicas"] = o.replicas;
    j["seed"] = o.seed;
    j["out"] = o.out;
    j["threads"] = o.threads;
    j["check"] = o.check;
    j["budget"] = o.budget;
    j["source"] = o.source;
    j["target"] = o.target;
    j["trials"] = o.trials;
    j["n"] = o.n;
    j["samples"] = o.samples;
    j["seeds"] = o.seeds;
    j["m"] = o.m;
    j["R"] = o.R;
    j["r"] = o.r ? nlohmann::ordered_json(*o.r) : nlohmann::ordered_json(nullptr);
    j["A"] = o.A;
    j["classes"] = o.classes;
    j["c-outer"] = o.c_outer ? nlohmann::ordered_json(*o.c_outer) : nlohmann::ordered_json(nullptr);
    j["c-inner"] = o.c_inner ? nlohmann::ordered_json(*o.c_inner) : nlohmann::ordered_json(nullptr);
    return j;
}

/// Config-file text that reproduces `o` when passed back through --config.
inline std::string to_config_file(const Options& o) {
    std::ostringstream os;
    const auto config = to_json(o);
    for (const auto& [key, value] : config.items()) {
        if (value.is_null() || key == "check") continue;
        if (value.is_string())
            os << key << "=\"" << value.get<std::string>() << "\"\n";
        else
            os << key << '=' << value.dump() << '\n';
    }
    return os.str();
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Writes through a temporary file and a rename so readers never see a
/// half-written file.
inline void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw resource_error("cannot open " + tmp.string() + " for writing", bytes.size());
        f << bytes;
        f.flush();
        if (!f) throw resource_error("write to " + tmp.string() + " failed", bytes.size());
    }
    std::filesystem::rename(tmp, path);
}

/// State of one invocation: collected output files and check verdicts.
class Run {
  public:
    Run(Options options, std::ostream& out) : options_(std::move(options)), out_(out) {}

    const Options& options() const { return options_; }
    std::ostream& out() { return out_; }

    /// Records an output file; written to --out when set.
    void emit_file(const std::string& name, const std::string& bytes) { files_.emplace_back(name, bytes); }

    void check(const std::string& name, bool passed, const std::string& detail) {
        checks_.push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
        if (options_.check) out_ << (passed ? "PASS  " : "FAIL  ") << name << ": " << detail << '\n';
        all_passed_ &= passed;
    }
    bool checks_passed() const { return all_passed_; }

    /// Writes data files and the manifest. Data files never hold timestamps,
    /// so rerunning the manifest config reproduces them byte for byte.
    void finish(std::chrono::system_clock::time_point start, int exit_code, const std::string& failure) {
        nlohmann::ordered_json manifest;
        manifest["version"] = kVersion;
        manifest["subcommand"] = options_.subcommand;
        manifest["config"] = to_json(options_);
        manifest["seed"] = options_.seed;
        manifest["threads"] = options_.threads;
        manifest["threads_env"] = kThreadsEnv;
        manifest["start"] = utc_timestamp(start);
        manifest["end"] = utc_timestamp(std::chrono::system_clock::now());
        manifest["exit_code"] = exit_code;
        manifest["error"] = failure.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(failure);
        nlohmann::ordered_json digests = nlohmann::ordered_json::object();
        for (const auto& [name, bytes] : files_) digests[name] = sha256_hex(bytes);
        manifest["outputs"] = digests;
        if (!checks_.empty()) manifest["checks"] = checks_;
        if (options_.out.empty()) return;
        const std::filesystem::path dir(options_.out);
        std::filesystem::create_directories(dir);
        for (const auto& [name, bytes] : files_) write_atomically(dir / name, bytes);
        write_atomically(dir / "config.txt", to_config_file(options_));
        write_atomically(dir / "manifest.json", manifest.dump(2) + "\n");
    }

  private:
    Options options_;
    std::ostream& out_;
    std::vector<std::pair<std::string, std::string>> files_;
    nlohmann::ordered_json checks_ = nlohmann::ordered_json::array();
    bool all_passed_ = true;
};

inline ScanConfig scan_config(const Options& o) {
    ScanConfig c;
    c.kind = parse_group(o.group);
    c.q = o.q;
    c.n_min = o.n_min;
    c.n_max = o.n_max;
    c.replicas = o.replicas;
    c.master_seed = o.seed;
    c.output_path = o.out;
    c.threads = o.threads;
    c.budget = o.budget;
    return c;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ','))
        if (const auto b = item.find_first_not_of(" \t"); b != std::string::npos)
            out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    return out;
}

inline std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands

inline void simulate(Run& run) {
    const auto& o = run.options();
    const auto config = scan_config(o);
    const auto scan = shape_scan(config);
    std::ostringstream csv, jsonl;
    write_records_csv(csv, o.group, o.q, scan.records);
    write_fits_jsonl(jsonl, scan);
    run.emit_file("records.csv", csv.str());
    run.emit_file("fits.jsonl", jsonl.str());
    run.out() << "records: " << scan.records.size() << "\n"
              << "max delta_I ~ " << fmt(scan.inner_log.c) << " ln n (R2 " << fmt(scan.inner_log.r_squared) << ")\n"
              << "max delta_O ~ " << fmt(scan.outer_sqrt.c) << " sqrt n (R2 " << fmt(scan.outer_sqrt.r_squared)
              << ")\n"
              << "median delta_O ~ n^" << fmt(scan.outer_power.alpha) << '\n';
    if (o.check) {
        const double K = std::log(o.q - 1.0);
        const auto bad = acceptance::envelope_violations(scan.records, K);
        run.check("shape envelope", bad == 0, std::to_string(bad) + " violations");
        const auto orders = acceptance::fluctuation_orders(scan.records, o.n_max);
        run.check("fluctuation orders", orders.passed, orders.detail + (orders.warning ? " (warning)" : ""));
    }
}

inline void lower_bounds(Run& run) {
    const auto& o = run.options();
    const auto scan = lower_bound_scan(scan_config(o), o.c_outer, o.c_inner);
    std::ostringstream csv;
    csv << "model,q,n,replica,seed,outer_shift,outer_reached,inner_radius,inner_covered\n";
    for (const auto& row : scan.rows)
        csv << o.group << ',' << o.q << ',' << row.n << ',' << row.replica << ',' << o.seed << ','
            << row.outer_shift << ',' << int(row.outer_reached) << ',' << row.inner_radius << ','
            << int(row.inner_covered) << '\n';
    nlohmann::ordered_json summary = {{"outer_constant", scan.outer_constant},
                                      {"inner_constant", scan.inner_constant},
                                      {"cells", scan.rows.size()},
                                      {"outer_reached_fraction", scan.outer_reached_fraction},
                                      {"inner_uncovered_fraction", scan.inner_uncovered_fraction}};
    run.emit_file("lower_bounds.csv", csv.str());
    run.emit_file("lower_bounds_summary.json", summary.dump() + "\n");
    run.out() << "cells: " << scan.rows.size() << "\nouter reached fraction: " << fmt(scan.outer_reached_fraction)
              << " (C_o = " << fmt(scan.outer_constant) << ")\ninner uncovered fraction: "
              << fmt(scan.inner_uncovered_fraction) << " (C_i = " << fmt(scan.inner_constant) << ")\n";
    if (o.check) {
        run.check("outer sphere reached in a majority", scan.outer_reached_fraction >= 0.5,
                  fmt(scan.outer_reached_fraction));
        run.check("inner ball left uncovered sometimes", scan.inner_uncovered_fraction > 0,
                  fmt(scan.inner_uncovered_fraction));
    }
}

template <CayleyGroup G>
void green_query(Run& run, const G& group) {
    const auto& o = run.options();
    const auto x = group.parse(o.source);
    const auto y = group.parse(o.target);
    nlohmann::ordered_json result = {{"group", o.group}, {"source", group.format(x)}, {"target", group.format(y)}};
    McOptions mc;
    mc.threads = o.threads;
    mc.trials = o.trials ? o.trials : 10'000;
    std::optional<double> exact_f;
    if constexpr (G::exact_formulas) {
        const auto d = hitting_distance(group, x, y);
        const auto z = group.multiply(group.inverse(x), y);
        const auto g = green(group, x, y);
        exact_f = std::exp(-d.value);
        const auto len = group.word_length(z);
        result["q"] = group.degree();
        result["word_distance"] = len;
        result["F"] = *exact_f;
        result["d"] = d.value;
        result["G"] = g.value;
        result["provenance"] = "exact";
        run.out() << "F = (" << group.degree() - 1 << ")^-" << len << " = " << fmt(*exact_f, 17) << '\n'
                  << "d = " << len << " ln " << group.degree() - 1 << " = " << fmt(d.value, 17) << '\n'
                  << "G = " << fmt(g.value, 17) << '\n';
    }
    if (!G::exact_formulas && x == y) {
        result["F"] = 1.0;
        result["d"] = 0.0;
        result["provenance"] = "exact";
        run.out() << "F = 1 (source equals target)\nd = 0\n";
    } else if (!G::exact_formulas || o.trials > 0) {
        const auto est = mc_F(group, x, y, mc, SeedSpec{o.seed, 0});
        const bool resolved = est.hits > 0;
        nlohmann::ordered_json m = {{"F", est.value},
                                    {"F_half_width", est.half_width},
                                    {"trials", est.trials},
                                    {"hits", est.hits},
                                    {"censored_fraction", est.censored_fraction},
                                    {"cutoff", est.cutoff},
                                    {"resolved", resolved}};
        if (resolved) {
            m["d"] = -est.log_value;
            m["d_half_width"] = est.half_width / est.value;
        } else {
            m["diagnostic"] = "no hits in " + std::to_string(est.trials) + " trials; distance not resolvable";
        }
        result["monte_carlo"] = m;
        run.out() << "Monte Carlo F = " << fmt(est.value) << " +- " << fmt(est.half_width) << " (" << est.trials
                  << " trials, censored " << fmt(est.censored_fraction) << ", cutoff " << est.cutoff << ")\n";
        if (resolved)
            run.out() << "Monte Carlo d = " << fmt(-est.log_value) << " +- " << fmt(est.half_width / est.value)
                      << '\n';
        else
            run.out() << m["diagnostic"].get<std::string>() << '\n';
        if (o.check) {
            run.check("censored fraction below 1e-3", est.censored_fraction < 1e-3, fmt(est.censored_fraction));
            if (exact_f) {
                const double dev = std::abs(est.value - *exact_f) / stats::binomial_sigma(*exact_f, est.trials);
                run.check("Monte Carlo within 3 sigma of exact", dev <= 3.0, fmt(dev) + " sigma");
            }
        }
    }
    run.emit_file("green.json", result.dump() + "\n");
}

inline void green_cmd(Run& run) {
    const auto& o = run.options();
    const auto kind = parse_group(o.group);
    if (kind == GroupKind::lamplighter)
        green_query(run, LamplighterGroup{});
    else
        green_query(run, make_tree_group(kind, o.q));
}

inline void exit_test(Run& run) {
    const auto& o = run.options();
    const auto group = make_tree_group(parse_group(o.group), o.q);
    std::vector<ExitTest> tests(o.seeds);
    parallel_for(tests.size(), o.threads, [&](std::size_t s) {
        tests[s] = exit_uniformity(group, o.n, o.samples, SeedSpec{o.seed, s}, UniformStep{}, o.budget);
    });
    std::ostringstream jsonl;
    std::vector<double> p;
    for (std::size_t s = 0; s < tests.size(); ++s) {
        const auto& t = tests[s];
        jsonl << nlohmann::ordered_json{{"stream", s},
                                        {"n", t.n},
                                        {"samples", t.samples},
                                        {"statistic", t.statistic},
                                        {"dof", t.dof},
                                        {"p_value", t.p_value},
                                        {"counts", t.counts}}
                     .dump()
              << '\n';
        p.push_back(t.p_value);
        run.out() << "stream " << s << ": chi2 = " << fmt(t.statistic) << ", dof = " << t.dof
                  << ", p = " << fmt(t.p_value) << '\n';
    }
    run.emit_file("exit_test.jsonl", jsonl.str());
    if (p.size() >= 2) {
        const auto ks = stats::ks_uniform(p);
        run.out() << "KS uniformity of p-values: D = " << fmt(ks.statistic) << ", p = " << fmt(ks.p_value) << '\n';
        if (o.check) run.check("p-values KS-uniform at level 0.01", ks.p_value >= 0.01, fmt(ks.p_value));
    } else if (o.check) {
        run.check("p-value in (0.001, 0.999)", p[0] > 0.001 && p[0] < 0.999, fmt(p[0]));
    }
}

inline void boxes(Run& run) {
    const auto& o = run.options();
    const auto res = balls_in_boxes(o.n, o.m, o.trials ? o.trials : 100'000, SeedSpec{o.seed, 0});
    nlohmann::ordered_json j = {{"balls", res.balls},         {"boxes", res.boxes},
                                {"trials", res.trials},       {"empirical", res.empirical},
                                {"half_width", res.half_width}, {"bound", res.bound}};
    run.out() << "empirical = " << fmt(res.empirical) << " +- " << fmt(res.half_width) << '\n';
    if (res.exact) {
        j["exact"] = *res.exact;
        j["exact_fraction"] = res.exact_numerator + "/" + res.exact_denominator;
        // Reduce the fraction for display.
        using boost::multiprecision::cpp_rational;
        const cpp_rational frac(boost::multiprecision::cpp_int(res.exact_numerator),
                                boost::multiprecision::cpp_int(res.exact_denominator));
        run.out() << "exact = " << res.exact_numerator << '/' << res.exact_denominator << " = " << frac.str()
                  << " = " << fmt(*res.exact) << '\n';
    }
    run.out() << "bound = " << fmt(res.bound) << '\n';
    run.emit_file("boxes.json", j.dump() + "\n");
    if (o.check) {
        if (res.exact) {
            run.check("exact value below the bound", *res.exact <= res.bound * (1 + 1e-12), fmt(*res.exact));
            const double sigma = stats::binomial_sigma(*res.exact, res.trials);
            const double dev = sigma > 0 ? std::abs(res.empirical - *res.exact) / sigma
                                         : (res.empirical == *res.exact ? 0.0 : INFINITY);
            run.check("empirical within 3 sigma of exact", dev <= 3.0, fmt(dev) + " sigma");
        } else {
            run.check("empirical below the bound", res.empirical - res.half_width <= res.bound, fmt(res.empirical));
        }
    }
}

inline void mouse(Run& run) {
    const auto& o = run.options();
    const auto group = make_tree_group(parse_group(o.group), o.q);
    std::vector<std::uint64_t> marked;
    for (const auto& w : split_list(o.A)) {
        const Word word = group.parse(w);
        if (word.length() != o.R + 1)
            throw invalid_input("word " + w + " is not on the boundary of B(" + std::to_string(o.R) + ")");
        marked.push_back(sphere_rank(group, word));
    }
    if (!o.classes.empty()) {
        const auto p = class_partition(group, o.R, *o.r);
        for (const auto& c : split_list(o.classes)) {
            const auto cls = std::stoull(c);
            if (cls >= p.class_count) throw invalid_input("class index " + c + " out of range");
            for (auto i : p.members(cls)) marked.push_back(i);
        }
    }
    std::sort(marked.begin(), marked.end());
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
    const auto res = mouse_select(group, o.R, marked);
    nlohmann::ordered_json path = nlohmann::ordered_json::array();
    for (const auto& m : res.path) path.push_back(group.format(m));
    nlohmann::ordered_json j = {{"q", o.q},           {"R", o.R},
                                {"marked", marked.size()}, {"z", group.format(res.z)},
                                {"index", res.index}, {"path", path},
                                {"t_counts", res.t_counts}};
    run.emit_file("mouse.json", j.dump() + "\n");
    run.out() << "z_A = " << group.format(res.z) << " (sphere index " << res.index << ", |A| = " << marked.size()
              << ")\n";
    if (o.check) {
        const bool ok = acceptance::detail::mouse_invariants_hold(
            group, o.R, marked, o.classes.empty() || !o.A.empty() ? std::nullopt : o.r, true);
        run.check("Mouse invariants", ok, "z_A = " + group.format(res.z));
    }
}

inline void acceptance_cmd(Run& run) {
    const auto& o = run.options();
    std::ostringstream report;
    acceptance::run_all(o.seed, o.threads, [&](const acceptance::CriterionResult& r) {
        const auto line = acceptance::format_line(r);
        run.out() << line << std::endl;
        report << line << '\n';
        run.check("criterion " + std::to_string(r.id), r.passed, r.detail);
    });
    run.emit_file("acceptance.txt", report.str());
}

/// Full entry point; returns the process exit code.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const auto start = std::chrono::system_clock::now();
    Options options;
    try {
        std::string help;
        try {
            options = parse_config(argc, argv, &help);
        } catch (const CLI::Success&) {
            out << help;
            return ok;
        }
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\nrun with --help for usage\n";
        return usage;
    }

    Run run(options, out);
    int code = ok;
    std::string failure;
    try {
        const auto& s = options.subcommand;
        if (s == "simulate") simulate(run);
        else if (s == "lower-bounds") lower_bounds(run);
        else if (s == "green") green_cmd(run);
        else if (s == "exit-test") exit_test(run);
        else if (s == "boxes") boxes(run);
        else if (s == "mouse") mouse(run);
        else if (s == "acceptance") acceptance_cmd(run);
        if (!run.checks_passed() && (options.check || s == "acceptance")) {
            code = check_failed;
            failure = "acceptance check failed";
        }
    } catch (const invalid_input& e) {
        code = usage;
        failure = e.what();
    } catch (const std::exception& e) {
        code = runtime;
        failure = e.what();
    }
    if (code == usage || code == runtime) err << "error: " << failure << '\n';
    try {
        run.finish(start, code, failure);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        if (code == ok) code = runtime;
    }
    return code;
}

}  // namespace idla::cli
