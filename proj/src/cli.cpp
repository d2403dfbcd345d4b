#include "shiftlab/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>

#include "shiftlab/assignment.hpp"
#include "shiftlab/config.hpp"
#include "shiftlab/csv.hpp"
#include "shiftlab/errors.hpp"
#include "shiftlab/estimators.hpp"
#include "shiftlab/fixtures.hpp"
#include "shiftlab/mc_lab.hpp"
#include "shiftlab/samples.hpp"

namespace shiftlab {

namespace {

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::uint64_t resolve_seed(const Json& config, const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return *flag_seed;
    return require_seed(config);
}

// ---- verify-theorem1 ----------------------------------------------------

int cmd_verify_theorem1(const std::string& config_path, const std::string& out_path,
                        std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    ExperimentConfig config{joint_from_json(require_field(raw, "joint")),
                            ShiftSpec{ShiftKind::symmetric_dirichlet,
                                      require_number(raw, "kappa_m2"), CrossXMode::independent},
                            ShiftSpec{ShiftKind::symmetric_dirichlet,
                                      require_number(raw, "kappa_m1"), CrossXMode::independent},
                            static_cast<std::size_t>(require_number(raw, "n_reps")),
                            resolve_seed(raw, seed_flag)};
    if (raw.contains("cross_x_mode")) {
        const auto mode = cross_x_mode_from_string(raw["cross_x_mode"].get<std::string>());
        config.spec_m2.cross_x = mode;
        config.spec_m1.cross_x = mode;
    }
    if (raw.contains("x_weighting")) {
        config.x_weighting = x_weighting_from_string(raw["x_weighting"].get<std::string>());
    }
    if (raw.contains("batch_count")) {
        config.batch_count = raw["batch_count"].get<std::size_t>();
    }

    const MseReport report = run_theorem1_experiment(config);

    CsvTable table;
    table.header = {"method", "empirical_mse", "mc_se", "theory_total", "pass"};
    for (const auto& m : report.methods) {
        table.rows.push_back({to_string(m.method), format_number(m.empirical_mse),
                              format_number(m.mc_se), format_number(m.theoretical.total()),
                              fmt_bool(m.pass)});
    }
    table.rows.push_back({"ordering_C_le_A", format_number(report.ordering_fraction),
                          format_number(0.0), format_number(0.99),
                          fmt_bool(report.ordering_pass)});
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "verify-theorem1"},
                  {"joint", joint_to_json(config.base_joint)},
                  {"kappa_m2", config.spec_m2.strength},
                  {"kappa_m1", config.spec_m1.strength},
                  {"cross_x_mode", to_string(config.spec_m2.cross_x)},
                  {"n_reps", config.n_reps},
                  {"seed", config.seed},
                  {"x_weighting", to_string(config.x_weighting)},
                  {"batch_count", config.batch_count}};
    write_sidecar(out_path, resolved);
    return report.all_pass() ? 0 : 2;
}

// ---- verify-theorem2 ----------------------------------------------------

int cmd_verify_theorem2(const std::string& config_path, const std::string& out_path,
                        std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    const std::string generator = raw.contains("generator")
                                      ? raw["generator"].get<std::string>()
                                      : "asymmetric_marginal";
    const ShiftKind kind = shift_kind_from_string(generator);
    ExperimentConfig config{joint_from_json(require_field(raw, "joint")),
                            ShiftSpec{kind, require_number(raw, "scale_m2"),
                                      CrossXMode::independent},
                            ShiftSpec{kind, require_number(raw, "scale_m1"),
                                      CrossXMode::independent},
                            static_cast<std::size_t>(require_number(raw, "n_reps")),
                            resolve_seed(raw, seed_flag)};
    if (raw.contains("fit_scaling")) config.fit_scaling = raw["fit_scaling"].get<bool>();

    const MseReport report = run_theorem2_experiment(config);

    CsvTable table;
    table.header = {"method", "empirical_mse", "mc_se", "pass"};
    for (const auto& m : report.methods) {
        table.rows.push_back({to_string(m.method), format_number(m.empirical_mse),
                              format_number(m.mc_se), fmt_bool(true)});
    }
    table.rows.push_back({"ordering_C_le_min", format_number(report.ordering_fraction), "0",
                          fmt_bool(report.ordering_pass)});
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "verify-theorem2"},
                  {"joint", joint_to_json(config.base_joint)},
                  {"generator", to_string(kind)},
                  {"scale_m2", config.spec_m2.strength},
                  {"scale_m1", config.spec_m1.strength},
                  {"n_reps", config.n_reps},
                  {"seed", config.seed},
                  {"fit_scaling", config.fit_scaling}};
    write_sidecar(out_path, resolved);
    return report.ordering_pass ? 0 : 2;
}

// ---- finite-sample -------------------------------------------------------

int cmd_finite_sample(const std::string& config_path, const std::string& out_path,
                      std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    const ConditionalJoint joint = joint_from_json(require_field(raw, "joint"));
    const std::string x = require_field(raw, "x").get<std::string>();
    const auto n_m2 = static_cast<std::size_t>(require_number(raw, "n_m2"));
    const auto n_m1 = static_cast<std::size_t>(require_number(raw, "n_m1"));
    const auto n_reps = static_cast<std::size_t>(require_number(raw, "n_reps"));
    const std::uint64_t seed = resolve_seed(raw, seed_flag);
    std::optional<std::pair<double, double>> beta;
    if (raw.contains("linear_proxy_beta")) {
        const Json& b = raw["linear_proxy_beta"];
        if (!b.is_array() || b.size() != 2) {
            throw validation_error("SchemaViolation", "linear_proxy_beta must be [beta1, beta0]");
        }
        beta = std::make_pair(b[0].get<double>(), b[1].get<double>());
    }

    const FiniteSampleResult res =
        run_finite_sample_experiment(joint, x, n_m2, n_m1, n_reps, seed, beta);

    CsvTable table;
    table.header = {"method", "metric", "value", "se", "oracle"};
    auto row = [&](const std::string& m, const std::string& metric, double v, double se,
                   double oracle) {
        table.rows.push_back({m, metric, format_number(v), format_number(se),
                              format_number(oracle)});
    };
    row("A", "n_var", res.n_var_A, res.n_var_A_se, res.oracle.sigma2_A);
    row("C", "n_var", res.n_var_C, res.n_var_C_se, res.oracle.sigma2_C);
    if (res.n_var_B) {
        row("B_scaled", "n_var", *res.n_var_B, *res.n_var_B_se, res.oracle.sigma2_B_checked());
    }
    row("A", "bias", res.bias_A, res.bias_A_se, 0.0);
    row("C", "bias", res.bias_C, res.bias_C_se, 0.0);
    if (res.bias_B) row("B_scaled", "bias", *res.bias_B, *res.bias_B_se, 0.0);
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "finite-sample"},
                  {"joint", joint_to_json(joint)},
                  {"x", x},
                  {"n_m2", n_m2},
                  {"n_m1", n_m1},
                  {"n_reps", n_reps},
                  {"seed", seed}};
    if (beta) resolved["linear_proxy_beta"] = {beta->first, beta->second};
    write_sidecar(out_path, resolved);
    return 0;
}

// ---- bench-permutation ---------------------------------------------------

int cmd_bench_permutation(const std::string& config_path, const std::string& out_path,
                          std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    PermutationBenchmarkConfig config{joint_from_json(require_field(raw, "joint"))};
    if (raw.contains("shift_grid")) {
        config.shift_grid.clear();
        for (const Json& v : raw["shift_grid"]) config.shift_grid.push_back(v.get<double>());
    }
    if (raw.contains("proxy_strength")) config.proxy_strength = raw["proxy_strength"].get<double>();
    if (raw.contains("n_total")) config.n_total = raw["n_total"].get<std::size_t>();
    config.n_splits = static_cast<std::size_t>(require_number(raw, "n_splits"));
    config.seed = resolve_seed(raw, seed_flag);

    const std::vector<BenchmarkCell> cells = run_permutation_benchmark(config);

    CsvTable table;
    table.header = {"shift", "method", "mse", "mse_se", "r2", "r2_se"};
    for (const auto& c : cells) {
        table.rows.push_back({format_number(c.shift), c.method, format_number(c.mse),
                              format_number(c.mse_se), format_number(c.r2),
                              format_number(c.r2_se)});
    }
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "bench-permutation"},
                  {"joint", joint_to_json(config.joint)},
                  {"shift_grid", config.shift_grid},
                  {"proxy_strength", config.proxy_strength},
                  {"n_total", config.n_total},
                  {"n_splits", config.n_splits},
                  {"seed", config.seed}};
    write_sidecar(out_path, resolved);
    return 0;
}

// ---- estimate --------------------------------------------------------------

int cmd_estimate(const std::string& method, const std::string& train_m2,
                 const std::string& train_m1, const std::string& target,
                 const std::string& out_path) {
    if (method != "A" && method != "B" && method != "C") {
        throw validation_error("SchemaViolation", "--method must be A, B, or C");
    }
    if (target.empty()) {
        throw validation_error("SchemaViolation", "--target is required");
    }
    const bool need_m2 = method == "A" || method == "C";
    const bool need_m1 = method == "B" || method == "C";
    if (need_m2 && train_m2.empty()) {
        throw validation_error("SchemaViolation", "--train-m2 is required for method " + method);
    }
    if (need_m1 && train_m1.empty()) {
        throw validation_error("SchemaViolation", "--train-m1 is required for method " + method);
    }

    SampleSet all;
    SampleSet m2_set, m1_set;
    if (!train_m2.empty()) {
        m2_set = load_dataset(train_m2);
        all.rows.insert(all.rows.end(), m2_set.rows.begin(), m2_set.rows.end());
    }
    if (!train_m1.empty()) {
        m1_set = load_dataset(train_m1);
        all.rows.insert(all.rows.end(), m1_set.rows.begin(), m1_set.rows.end());
    }
    const SampleSet target_set = load_dataset(target);
    all.rows.insert(all.rows.end(), target_set.rows.begin(), target_set.rows.end());
    const Alphabet alphabet = induce_alphabet(all);

    PredictorTable predictions{{}, {}};
    std::vector<bool> flagged(alphabet.n_x(), false);
    if (method == "A") {
        predictions = hat_tau_A(m2_set, alphabet);
    } else if (method == "B") {
        ProxyScaling scaling = ProxyScaling::identity();
        if (!train_m2.empty()) {
            scaling = fit_proxy_scaling_empirical(
                EmpiricalCounts::from_samples(m2_set, -2, alphabet), alphabet);
        }
        predictions = hat_tau_B(m1_set, alphabet, scaling);
    } else {
        SampleSet both;
        both.rows = m2_set.rows;
        both.rows.insert(both.rows.end(), m1_set.rows.begin(), m1_set.rows.end());
        const HatTauCResult res = hat_tau_C(both, alphabet);
        predictions = res.table;
        flagged = res.flagged;
    }

    // Emit predictions for the covariate tokens that occur in the target.
    std::vector<bool> in_target(alphabet.n_x(), false);
    for (const auto& r : target_set.rows) {
        const auto xi = alphabet.x_index(r.x);
        if (xi) in_target[*xi] = true;
    }
    CsvTable table;
    table.header = {"x", "prediction", "flagged"};
    for (std::size_t xi = 0; xi < alphabet.n_x(); ++xi) {
        if (!in_target[xi]) continue;
        table.rows.push_back({alphabet.x_label(xi), format_number(predictions.values[xi]),
                              fmt_bool(flagged[xi])});
    }
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion}, {"command", "estimate"},
                  {"method", method},                 {"train_m2", train_m2},
                  {"train_m1", train_m1},             {"target", target}};
    write_sidecar(out_path, resolved);
    return 0;
}

// ---- induce-shift ----------------------------------------------------------

int cmd_induce_shift(const std::string& config_path, const std::string& out_path,
                     std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    const ConditionalJoint joint = joint_from_json(require_field(raw, "joint"));
    const ShiftSpec spec = spec_from_json(require_field(raw, "shift"));
    const std::uint64_t seed = resolve_seed(raw, seed_flag);

    RngStream rng(seed);
    const ShiftResult res = sample_shift(joint, spec, rng);

    const Alphabet& a = joint.alphabet();
    CsvTable table;
    table.header = {"x", "y1", "y2", "base_prob", "delta", "shifted_prob"};
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) {
                const std::size_t cell = i1 * a.n_y2() + i2;
                table.rows.push_back({a.x_label(xi), a.y1_level(i1).label, a.y2_level(i2).label,
                                      format_number(joint.prob(xi, i1, i2)),
                                      format_number(res.draw.at(xi, cell)),
                                      format_number(res.shifted.prob(xi, i1, i2))});
            }
        }
    }
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "induce-shift"},
                  {"joint", joint_to_json(joint)},
                  {"shift", spec_to_json(spec)},
                  {"seed", seed}};
    write_sidecar(out_path, resolved);
    return 0;
}

// ---- validate-generator ------------------------------------------------------

int cmd_validate_generator(const std::string& config_path, const std::string& out_path,
                           std::optional<std::uint64_t> seed_flag) {
    const Json raw = load_config_file(config_path);
    const ConditionalJoint joint = joint_from_json(require_field(raw, "joint"));
    const ShiftSpec spec = spec_from_json(require_field(raw, "shift"));
    const auto n_draws = static_cast<std::size_t>(require_number(raw, "n_draws"));
    const std::uint64_t seed = resolve_seed(raw, seed_flag);

    RngStream rng(seed);
    const ValidationReport report = validate_generator(spec, joint, n_draws, rng);

    CsvTable table;
    table.header = {"x", "event", "statistic", "empirical", "se", "theoretical", "pass"};
    for (const auto& r : report.rows) {
        table.rows.push_back({r.x_label, r.event, r.statistic, format_number(r.empirical),
                              format_number(r.standard_error), format_number(r.theoretical),
                              fmt_bool(r.pass)});
    }
    write_csv_file(out_path, table);

    Json resolved{{"schema_version", kSchemaVersion},
                  {"command", "validate-generator"},
                  {"joint", joint_to_json(joint)},
                  {"shift", spec_to_json(spec)},
                  {"n_draws", n_draws},
                  {"seed", seed}};
    write_sidecar(out_path, resolved);
    return 0;
}

// ---- assign ------------------------------------------------------------------

AssignmentInstance load_assignment_instance(const std::string& weights_path,
                                            const std::string& capacities_path,
                                            const std::string& groups_path,
                                            std::vector<std::string>& unit_ids,
                                            std::vector<std::string>& location_ids) {
    const CsvTable capacities_csv = read_csv_file(capacities_path);
    if (capacities_csv.header != std::vector<std::string>{"location", "capacity"}) {
        throw validation_error("SchemaViolation",
                               "capacities file needs header location,capacity");
    }
    AssignmentInstance inst;
    std::map<std::string, std::size_t> loc_index;
    for (const auto& row : capacities_csv.rows) {
        if (row.size() != 2) {
            throw validation_error("ParseError", "capacities rows need 2 fields");
        }
        if (!loc_index.emplace(row[0], location_ids.size()).second) {
            throw validation_error("SchemaViolation", "duplicate location '" + row[0] + "'");
        }
        location_ids.push_back(row[0]);
        inst.capacities.push_back(std::stoi(row[1]));
    }

    const CsvTable weights_csv = read_csv_file(weights_path);
    if (weights_csv.header != std::vector<std::string>{"unit", "location", "weight"}) {
        throw validation_error("SchemaViolation",
                               "weights file needs header unit,location,weight");
    }
    std::map<std::string, std::size_t> unit_index;
    for (const auto& row : weights_csv.rows) {
        if (row.size() != 3) {
            throw validation_error("ParseError", "weights rows need 3 fields");
        }
        auto [it, inserted] = unit_index.emplace(row[0], unit_ids.size());
        if (inserted) {
            unit_ids.push_back(row[0]);
            inst.weights.emplace_back(location_ids.size(), 0.0);
        }
        const auto li = loc_index.find(row[1]);
        if (li == loc_index.end()) {
            throw validation_error("SchemaViolation", "unknown location '" + row[1] + "'");
        }
        inst.weights[it->second][li->second] = std::stod(row[2]);
    }

    if (!groups_path.empty()) {
        const CsvTable groups_csv = read_csv_file(groups_path);
        if (groups_csv.header != std::vector<std::string>{"unit", "group"}) {
            throw validation_error("SchemaViolation", "groups file needs header unit,group");
        }
        inst.groups.assign(unit_ids.size(), "");
        for (const auto& row : groups_csv.rows) {
            if (row.size() != 2) {
                throw validation_error("ParseError", "groups rows need 2 fields");
            }
            const auto ui = unit_index.find(row[0]);
            if (ui == unit_index.end()) {
                throw validation_error("SchemaViolation", "unknown unit '" + row[0] + "'");
            }
            inst.groups[ui->second] = row[1];
        }
    }
    return inst;
}

int cmd_assign(const std::string& weights_path, const std::string& capacities_path,
               const std::string& groups_path, const std::string& truth_path,
               const std::string& out_path) {
    std::vector<std::string> unit_ids, location_ids;
    const AssignmentInstance inst = load_assignment_instance(weights_path, capacities_path,
                                                             groups_path, unit_ids, location_ids);
    const Assignment assignment = solve_assignment(inst);

    CsvTable table;
    table.header = {"unit", "location", "predicted_weight"};
    for (std::size_t i = 0; i < unit_ids.size(); ++i) {
        const std::size_t j = assignment.location_of[i];
        table.rows.push_back({unit_ids[i], location_ids[j],
                              format_number(inst.weights[i][j])});
    }
    write_csv_file(out_path, table);

    CsvTable metrics;
    metrics.header = {"metric", "value"};
    metrics.rows.push_back({"objective", format_number(assignment.objective)});
    if (!truth_path.empty()) {
        std::vector<std::string> t_units, t_locs;
        const AssignmentInstance truth_inst = load_assignment_instance(
            truth_path, capacities_path, groups_path, t_units, t_locs);
        if (t_units != unit_ids || t_locs != location_ids) {
            throw validation_error("DimensionMismatch",
                                   "truth weights must cover the same units and locations");
        }
        metrics.rows.push_back(
            {"impact", format_number(evaluate_impact(assignment, truth_inst.weights))});
        // Baseline: the assignment an oracle on the truth weights would pick.
        const Assignment truth_best = solve_assignment(truth_inst);
        metrics.rows.push_back({"truth_optimum", format_number(truth_best.objective)});
        metrics.rows.push_back(
            {"regret", format_number(truth_best.objective -
                                     evaluate_impact(assignment, truth_inst.weights))});
    }
    write_csv_file(out_path + ".metrics.csv", metrics);

    Json resolved{{"schema_version", kSchemaVersion}, {"command", "assign"},
                  {"weights", weights_path},          {"capacities", capacities_path},
                  {"groups", groups_path},            {"truth", truth_path}};
    write_sidecar(out_path, resolved);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Simulation lab for prediction under random distribution shift"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::optional<std::uint64_t> seed_flag;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", config_path, "JSON config path")->required();
        }
        cmd->add_option("--out", out_path, "output report CSV path")->required();
        cmd->add_option("--seed", seed_flag, "seed override");
        return cmd;
    };

    CLI::App* theorem1 = add_common(
        app.add_subcommand("verify-theorem1", "Monte Carlo check of the symmetric-shift MSE"),
        true);
    CLI::App* theorem2 = add_common(
        app.add_subcommand("verify-theorem2", "Monte Carlo check of the asymmetric ordering"),
        true);
    CLI::App* finite = add_common(
        app.add_subcommand("finite-sample", "No-shift sampling variance experiment"), true);
    CLI::App* bench = add_common(
        app.add_subcommand("bench-permutation", "Permutation-shift benchmark"), true);
    CLI::App* induce =
        add_common(app.add_subcommand("induce-shift", "Draw one shift and report it"), true);
    CLI::App* validate = add_common(
        app.add_subcommand("validate-generator", "Moment audit of a shift generator"), true);

    CLI::App* estimate = app.add_subcommand("estimate", "Plug-in predictions from CSV datasets");
    std::string method, train_m2, train_m1, target;
    estimate->add_option("--method", method, "A, B, or C")->required();
    estimate->add_option("--train-m2", train_m2, "period -2 dataset CSV");
    estimate->add_option("--train-m1", train_m1, "period -1 dataset CSV");
    estimate->add_option("--target", target, "period 0 dataset CSV")->required();
    estimate->add_option("--out", out_path, "predictions CSV path")->required();

    CLI::App* assign = app.add_subcommand("assign", "Capacity-constrained assignment");
    std::string weights_path, capacities_path, groups_path, truth_path;
    assign->add_option("--weights", weights_path, "unit,location,weight CSV")->required();
    assign->add_option("--capacities", capacities_path, "location,capacity CSV")->required();
    assign->add_option("--groups", groups_path, "unit,group CSV");
    assign->add_option("--truth", truth_path, "truth weights CSV for impact");
    assign->add_option("--out", out_path, "assignment CSV path")->required();

    std::vector<const char*> argv;
    argv.push_back("shiftlab");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERROR Usage " << e.what() << '\n';
        std::cerr << app.help();
        return 1;
    }

    try {
        if (theorem1->parsed()) return cmd_verify_theorem1(config_path, out_path, seed_flag);
        if (theorem2->parsed()) return cmd_verify_theorem2(config_path, out_path, seed_flag);
        if (finite->parsed()) return cmd_finite_sample(config_path, out_path, seed_flag);
        if (bench->parsed()) return cmd_bench_permutation(config_path, out_path, seed_flag);
        if (induce->parsed()) return cmd_induce_shift(config_path, out_path, seed_flag);
        if (validate->parsed()) return cmd_validate_generator(config_path, out_path, seed_flag);
        if (estimate->parsed()) {
            return cmd_estimate(method, train_m2, train_m1, target, out_path);
        }
        if (assign->parsed()) {
            return cmd_assign(weights_path, capacities_path, groups_path, truth_path, out_path);
        }
    } catch (const Error& e) {
        std::cerr << "ERROR " << e.kind() << ' ' << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "ERROR Internal " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace shiftlab
