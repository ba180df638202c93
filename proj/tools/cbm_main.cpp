// Command-line surface for the censored-block-model experiments.
//
// Subcommands:
//   rs-curve    h_RS(x) curves per q, CSV (+ optional SVG with argmax circles)
//   phase       (q, x*, h*) scan with first-order jump report
//   entropy-mc  rank-based Monte Carlo entropy vs the replica prediction
//   verify      exact oracle suites (Nishimori, GKS, gauge, rank-oracle)
//   interpolate adaptive path + sum rule + concentration tables
//
// Config precedence: flags > --config JSON file > defaults. The resolved
// config (with the master seed) is echoed into every artifact. All
// randomness derives from --seed through per-trial child streams, so reruns
// are bit-identical regardless of thread count.
//
// Exit codes: 0 all checks pass, 1 violation detected, 2 usage error.

#include "cbm/interpolation.hpp"
#include "cbm/io.hpp"
#include "cbm/model.hpp"
#include "cbm/oracle.hpp"
#include "cbm/parallel.hpp"
#include "cbm/replica.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct RunConfig {
    std::size_t n = 200;
    unsigned K = 3;
    double alpha = 0.2;
    double q = 0.5;
    std::vector<double> q_list;
    std::size_t T = 0; // 0 = default 20 n for interpolate
    double eps = 0.1;
    double delta = 0.1;
    double theta = 0.2;
    std::size_t trials = 100;
    std::size_t path_trials = 200;
    std::size_t lhs_trials = 0; // 0 = 50 * trials
    std::size_t grid = 2001;
    double q_min = 0.0;
    double q_max = 1.0;
    double q_step = 0.01;
    double refine_width = 1e-4;
    double constant_path = -1.0; // < 0 = adaptive
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool svg = false;
    std::string out = "out";
    std::string config_file;
};

json config_json(const RunConfig& c, const std::string& command) {
    json j;
    j["command"] = command;
    j["n"] = c.n;
    j["K"] = c.K;
    j["alpha"] = c.alpha;
    j["q"] = c.q;
    j["q_list"] = c.q_list;
    j["T"] = c.T;
    j["eps"] = c.eps;
    j["delta"] = c.delta;
    j["theta"] = c.theta;
    j["trials"] = c.trials;
    j["path_trials"] = c.path_trials;
    j["lhs_trials"] = c.lhs_trials;
    j["grid"] = c.grid;
    j["q_min"] = c.q_min;
    j["q_max"] = c.q_max;
    j["q_step"] = c.q_step;
    j["refine_width"] = c.refine_width;
    j["constant_path"] = c.constant_path;
    j["master_seed"] = c.seed;
    j["threads"] = c.threads;
    j["out"] = c.out;
    return j;
}

// flags > config file > defaults: reload any option the command line did
// not set from the JSON config.
void apply_config_file(CLI::App& app, const std::string& path) {
    const auto j = json::parse(cbm::read_text_file(path));
    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr || opt->count() > 0) continue;
        std::vector<std::string> items;
        if (value.is_array()) {
            for (const auto& v : value) items.push_back(v.dump());
        } else if (value.is_string()) {
            items.push_back(value.get<std::string>());
        } else {
            items.push_back(value.dump());
        }
        opt->add_result(items.front());
        for (std::size_t i = 1; i < items.size(); ++i) opt->add_result(items[i]);
        opt->run_callback();
    }
}

std::filesystem::path out_path(const RunConfig& c, const std::string& name) {
    return std::filesystem::path(c.out) / name;
}

int cmd_rs_curve(const RunConfig& c) {
    const auto cfg = config_json(c, "rs-curve").dump();
    std::vector<double> qs = c.q_list.empty() ? std::vector<double>{c.q} : c.q_list;
    cbm::CsvTable table;
    table.columns = {"q", "x", "h"};
    table.config_json = cfg;
    std::vector<cbm::SvgSeries> series;
    std::vector<cbm::SvgMarker> markers;
    for (double q : qs) {
        const auto curve = cbm::rs_curve(c.K, c.alpha, q, c.grid);
        cbm::SvgSeries s;
        char label[48];
        std::snprintf(label, sizeof(label), "q=%.2f", q);
        s.label = label;
        for (std::size_t i = 0; i < curve.x.size(); ++i) {
            table.rows.push_back({q, curve.x[i], curve.h[i]});
            s.x.push_back(curve.x[i]);
            s.y.push_back(curve.h[i]);
        }
        const int shade = static_cast<int>(200.0 * (1.0 - q));
        char color[16];
        std::snprintf(color, sizeof(color), "#1f%02x%02x", 80 + shade / 2, 255 - shade);
        s.color = color;
        series.push_back(std::move(s));
        markers.push_back({curve.argmax_x, curve.argmax_h, "#d62728"});
    }
    cbm::write_text_file(out_path(c, "rs_curve.csv"), cbm::csv_to_string(table));
    if (c.svg) {
        cbm::write_text_file(out_path(c, "rs_curve.svg"),
                             cbm::svg_line_plot(series, markers, "x (erased mass)", "h_RS(x) [nats]",
                                                "replica free entropy"));
    }
    std::cout << "rs-curve: wrote " << out_path(c, "rs_curve.csv").string() << "\n";
    return 0;
}

int cmd_phase(const RunConfig& c) {
    const auto cfg = config_json(c, "phase").dump();
    std::vector<double> grid;
    for (double q = c.q_min; q <= c.q_max + 1e-12; q += c.q_step) grid.push_back(std::min(q, 1.0));
    const auto scan = cbm::phase_scan(c.K, c.alpha, grid, c.grid);
    cbm::CsvTable table;
    table.columns = {"q", "x_star", "h_star"};
    table.config_json = cfg;
    for (const auto& p : scan.points) table.rows.push_back({p.q, p.x_star, p.h_star});
    cbm::write_text_file(out_path(c, "phase.csv"), cbm::csv_to_string(table));

    json report;
    report["config"] = config_json(c, "phase");
    report["max_jump"] = scan.max_jump;
    report["jump_q_lo"] = scan.jump_q_lo;
    report["jump_q_hi"] = scan.jump_q_hi;
    if (scan.max_jump > 0.0) {
        const auto loc = cbm::locate_jump(c.K, c.alpha, scan.jump_q_lo, scan.jump_q_hi, c.refine_width, 8);
        report["refined"] = {{"q_lo", loc.q_lo},
                             {"q_hi", loc.q_hi},
                             {"x_lo", loc.x_lo},
                             {"x_hi", loc.x_hi},
                             {"jump", loc.jump},
                             {"cell_width", c.refine_width}};
    }
    cbm::write_text_file(out_path(c, "phase_jump.json"), report.dump(2) + "\n");
    std::cout << "phase: max |dx*| = " << scan.max_jump << " in q-cell [" << scan.jump_q_lo << ", "
              << scan.jump_q_hi << "]\n";
    return 0;
}

int cmd_entropy_mc(const RunConfig& c) {
    cbm::ModelParams mp{c.n, c.K, c.alpha, c.q};
    mp.validate();
    std::vector<double> values(c.trials);
    const cbm::RandomSource parent(c.seed);
    cbm::parallel_for_index(
        c.trials,
        [&](std::size_t i) {
            values[i] = cbm::free_entropy(cbm::generate_instance(mp, parent.child(i).seed()));
        },
        c.threads);
    cbm::RunningStat stat;
    for (double v : values) stat.add(v);
    const auto sup = cbm::sup_h_rs(c.K, c.alpha, c.q);

    json j;
    j["config"] = config_json(c, "entropy-mc");
    j["n"] = c.n;
    j["mean_entropy"] = stat.mean();
    j["se"] = stat.se();
    j["sup_h_rs"] = sup.h_star;
    j["x_star"] = sup.x_star;
    j["gap"] = stat.mean() - sup.h_star;
    cbm::write_text_file(out_path(c, "entropy_mc.json"), j.dump(2) + "\n");
    std::cout << "entropy-mc: mean=" << stat.mean() << " se=" << stat.se() << " sup=" << sup.h_star
              << " gap=" << stat.mean() - sup.h_star << "\n";
    return 0;
}

int cmd_verify(const RunConfig& c) {
    const cbm::RandomSource parent(c.seed);
    json report;
    report["config"] = config_json(c, "verify");
    bool all_pass = true;

    // rank-based free entropy == enumerated (1/n) ln Z, exactly
    {
        bool pass = true;
        std::size_t checked = 0;
        for (std::size_t trial = 0; trial < c.trials && pass; ++trial) {
            auto rng = parent.child(trial);
            const std::size_t n = 4 + rng.below(9); // 4..12
            cbm::ModelParams mp{n, std::min<unsigned>(c.K, static_cast<unsigned>(n)), 0.8, 0.4};
            const auto inst = cbm::generate_instance(mp, rng.next_u64());
            const auto gf2 = cbm::to_gf2(inst);
            const auto report_g = cbm::enumerate_gibbs(inst, {});
            pass = report_g.solution_count == (std::uint64_t{1} << (n - gf2.rank()));
            ++checked;
        }
        report["rank_oracle"] = {{"pass", pass}, {"instances", checked}};
        all_pass = all_pass && pass;
    }
    // Nishimori identity under exact disorder averaging
    {
        double worst = 0.0;
        auto rng = parent.child(1u << 20);
        for (std::size_t trial = 0; trial < std::max<std::size_t>(1, c.trials / 5); ++trial) {
            const std::size_t n = 5 + rng.below(3); // 5..7
            cbm::ModelParams mp{n, 3, 0.8, c.q};
            std::vector<cbm::Subset> factors;
            const auto m = 2 + rng.below(4); // 2..5
            for (std::uint64_t a = 0; a < m; ++a)
                factors.push_back(rng.k_subset(static_cast<std::uint32_t>(n), 3));
            std::vector<cbm::SubsetCollection> collections;
            for (int ci = 0; ci < 2; ++ci) {
                cbm::SubsetCollection coll;
                const auto subsets = 1 + rng.below(3);
                for (std::uint64_t si = 0; si < subsets; ++si)
                    coll.push_back(rng.k_subset(static_cast<std::uint32_t>(n),
                                                1 + static_cast<std::uint32_t>(rng.below(3))));
                collections.push_back(std::move(coll));
            }
            worst = std::max(worst, cbm::nishimori_check(mp, factors, collections));
        }
        const bool pass = worst <= 1e-12;
        report["nishimori"] = {{"pass", pass}, {"max_violation", worst}};
        all_pass = all_pass && pass;
    }
    // GKS inequalities, exact integer comparisons
    {
        bool pass = true;
        auto rng = parent.child(2u << 20);
        for (std::size_t trial = 0; trial < c.trials && pass; ++trial) {
            const std::size_t n = 4 + rng.below(7); // 4..10
            cbm::ModelParams mp{n, std::min<unsigned>(3, static_cast<unsigned>(n)), 0.9, 0.3};
            const auto inst = cbm::generate_instance(mp, rng.next_u64());
            std::vector<std::pair<cbm::Subset, cbm::Subset>> pairs;
            for (int pi = 0; pi < 4; ++pi)
                pairs.emplace_back(rng.k_subset(static_cast<std::uint32_t>(n),
                                                1 + static_cast<std::uint32_t>(rng.below(3))),
                                   rng.k_subset(static_cast<std::uint32_t>(n),
                                                1 + static_cast<std::uint32_t>(rng.below(3))));
            pass = cbm::gks_check(inst, pairs);
        }
        report["gks"] = {{"pass", pass}};
        all_pass = all_pass && pass;
    }
    // gauge invariance for random planted vectors
    {
        bool pass = true;
        auto rng = parent.child(3u << 20);
        for (std::size_t trial = 0; trial < std::max<std::size_t>(1, c.trials / 10) && pass; ++trial) {
            const std::size_t n = 4 + rng.below(4); // 4..7
            cbm::ModelParams mp{n, 3, 0.8, c.q};
            std::vector<cbm::Subset> factors;
            for (int a = 0; a < 3; ++a) factors.push_back(rng.k_subset(static_cast<std::uint32_t>(n), 3));
            std::vector<std::int8_t> planted(n);
            for (auto& sgn : planted) sgn = rng.bernoulli(0.5) ? 1 : -1;
            pass = cbm::gauge_invariance_check(mp, factors, planted);
        }
        report["gauge"] = {{"pass", pass}};
        all_pass = all_pass && pass;
    }

    report["all_pass"] = all_pass;
    cbm::write_text_file(out_path(c, "verify.json"), report.dump(2) + "\n");
    std::cout << "verify: " << (all_pass ? "all suites pass" : "VIOLATION FOUND") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_interpolate(const RunConfig& c) {
    cbm::InterpParams params;
    params.model = {c.n, c.K, c.alpha, c.q};
    params.T = c.T == 0 ? 20 * c.n : c.T;
    params.eps = c.eps;
    params.delta = c.delta;
    params.theta = c.theta;
    params.validate();

    const cbm::RandomSource parent(c.seed);
    json manifest;
    manifest["config"] = config_json(c, "interpolate");
    manifest["T"] = params.T;

    cbm::InterpPath path = cbm::InterpPath::constant(0.0, params);
    if (c.constant_path >= 0.0) {
        path = cbm::InterpPath::constant(c.constant_path, params);
        manifest["path"] = {{"kind", "constant"}, {"r", c.constant_path}};
    } else {
        const auto adaptive =
            cbm::adaptive_path(params, c.path_trials, parent.child(1).seed(), cbm::BuildMode::collapsed,
                               c.threads);
        path = adaptive.path;
        manifest["path"] = {{"kind", "adaptive"},
                            {"r", adaptive.path.r},
                            {"step_se", adaptive.step_se},
                            {"trials_per_step", c.path_trials}};
    }

    std::vector<double> grid_s;
    for (int i = 0; i <= 10; ++i) grid_s.push_back(i / 10.0);
    const std::size_t lhs_trials = c.lhs_trials == 0 ? 50 * c.trials : c.lhs_trials;
    const auto sum_rule = cbm::sum_rule_check(params, path, grid_s, c.trials, lhs_trials,
                                              parent.child(2).seed(), cbm::BuildMode::collapsed, c.threads);
    manifest["sum_rule"] = {{"lhs_mean", sum_rule.lhs.mean},
                            {"lhs_se", sum_rule.lhs.se},
                            {"generalized", sum_rule.generalized},
                            {"remainder_integral", sum_rule.remainder_integral},
                            {"remainder_se", sum_rule.remainder_se},
                            {"residual", sum_rule.residual},
                            {"residual_se", sum_rule.residual_se},
                            {"trials_per_point", sum_rule.trials_per_point},
                            {"lhs_trials", sum_rule.lhs_trials},
                            {"grid_s", sum_rule.grid_s}};

    const std::size_t n_list[] = {c.n};
    const auto conc = cbm::concentration_report(params, n_list, {}, std::max<std::size_t>(c.trials, 2),
                                                parent.child(3).seed(), c.threads);
    cbm::CsvTable conc_table;
    conc_table.columns = {"n",          "eps_lo",      "eps_hi",        "thermal_integral",
                          "thermal_se", "thermal_bound", "overlap_var", "fe_var",
                          "fe_var_times_n"};
    conc_table.config_json = manifest["config"].dump();
    for (const auto& row : conc) {
        conc_table.rows.push_back({static_cast<double>(row.n), row.eps_lo, row.eps_hi,
                                   row.thermal_integral, row.thermal_se, row.thermal_bound,
                                   row.overlap_disorder_var, row.fe_variance, row.fe_variance_times_n});
    }
    cbm::write_text_file(out_path(c, "concentration.csv"), cbm::csv_to_string(conc_table));

    cbm::CsvTable path_table;
    path_table.columns = {"t", "r", "tilde_r"};
    path_table.config_json = manifest["config"].dump();
    for (std::size_t t = 0; t < path.r.size(); ++t)
        path_table.rows.push_back({static_cast<double>(t + 1), path.r[t], path.tilde_r[t]});
    cbm::write_text_file(out_path(c, "path.csv"), cbm::csv_to_string(path_table));

    const bool residual_ok = std::abs(sum_rule.residual) <= 3.0 * sum_rule.residual_se + 1e-12;
    manifest["sum_rule"]["within_3se"] = residual_ok;
    cbm::write_text_file(out_path(c, "manifest.json"), manifest.dump(2) + "\n");
    std::cout << "interpolate: residual=" << sum_rule.residual << " (se " << sum_rule.residual_se
              << ") -> " << (residual_ok ? "within 3 SE" : "OUTSIDE 3 SE") << "\n";
    return residual_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"censored block model / BEC: exact rank entropy, replica prediction, adaptive interpolation"};
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--config", c.config_file, "JSON config file (flags take precedence)");
    app.add_option("--n", c.n, "variable count");
    app.add_option("--K", c.K, "factor degree");
    app.add_option("--alpha", c.alpha, "measurement fraction");
    app.add_option("--q", c.q, "erasure probability");
    app.add_option("--q-list", c.q_list, "list of q values (rs-curve)");
    app.add_option("--T", c.T, "interpolation steps (0 = 20 n)");
    app.add_option("--eps", c.eps, "field perturbation probability");
    app.add_option("--delta", c.delta, "n^-theta scaled field perturbation");
    app.add_option("--theta", c.theta, "perturbation exponent in (0, 1/5]");
    app.add_option("--trials", c.trials, "Monte Carlo trials (per point where applicable)");
    app.add_option("--path-trials", c.path_trials, "trials per adaptive-path step");
    app.add_option("--lhs-trials", c.lhs_trials, "trials for the sum-rule left side (0 = 50*trials)");
    app.add_option("--grid", c.grid, "grid points for curves / sup scans");
    app.add_option("--q-min", c.q_min, "phase scan start");
    app.add_option("--q-max", c.q_max, "phase scan end");
    app.add_option("--q-step", c.q_step, "phase scan step");
    app.add_option("--refine-width", c.refine_width, "jump bisection cell width");
    app.add_option("--constant-path", c.constant_path, "use a constant path r (>=0) instead of adaptive");
    app.add_option("--seed", c.seed, "master seed");
    app.add_option("--threads", c.threads, "worker threads (0 = hardware)");
    app.add_flag("--svg", c.svg, "also write SVG plots");
    app.add_option("--out", c.out, "output directory");

    auto* rs = app.add_subcommand("rs-curve", "replica free entropy curves");
    auto* phase = app.add_subcommand("phase", "phase diagram scan");
    auto* entropy = app.add_subcommand("entropy-mc", "Monte Carlo entropy vs replica prediction");
    auto* verify = app.add_subcommand("verify", "exact oracle verification suites");
    auto* interpolate = app.add_subcommand("interpolate", "adaptive interpolation run");

    try {
        app.parse(argc, argv);
        if (!c.config_file.empty()) apply_config_file(app, c.config_file);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (rs->parsed()) return cmd_rs_curve(c);
        if (phase->parsed()) return cmd_phase(c);
        if (entropy->parsed()) return cmd_entropy_mc(c);
        if (verify->parsed()) return cmd_verify(c);
        if (interpolate->parsed()) return cmd_interpolate(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
