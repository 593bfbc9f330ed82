// hope: fit, simulate and evaluate ERGMs by held-out prediction.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hope/datasets.hpp"
#include "hope/errors.hpp"
#include "hope/estimation.hpp"
#include "hope/graph_io.hpp"
#include "hope/harness.hpp"
#include "hope/model_parse.hpp"
#include "hope/report.hpp"
#include "hope/rng.hpp"
#include "hope/sampler.hpp"

namespace fs = std::filesystem;
using namespace hope;

namespace {

struct GraphArgs {
    std::string dataset;  // name under data/ or a directory / manifest path
    std::string edges;
    std::string attributes;
    std::size_t n = 0;
    int index_base = 0;
};

struct RunConfig {
    GraphArgs graph;
    std::vector<std::string> models;
    std::vector<std::string> strategies;
    std::optional<std::size_t> folds;
    std::size_t draws = 500;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out;
    std::string free_file;
    std::string theta;
    std::string fit_file;
    std::optional<std::size_t> subset;
    bool exact_loo = false;
    bool full_fit = true;
    EstimatorConfig estimator;
    SamplerConfig sampler;
    std::string config_file;
};

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j{{"dataset", c.graph.dataset},
                     {"edges", c.graph.edges},
                     {"attributes", c.graph.attributes},
                     {"n", c.graph.n},
                     {"index_base", c.graph.index_base},
                     {"model", c.models},
                     {"strategy", c.strategies},
                     {"folds", c.folds ? nlohmann::json(*c.folds) : nlohmann::json(nullptr)},
                     {"draws", c.draws},
                     {"seed", c.seed},
                     {"workers", c.workers},
                     {"out", c.out},
                     {"free", c.free_file},
                     {"theta", c.theta},
                     {"fit", c.fit_file},
                     {"subset", c.subset ? nlohmann::json(*c.subset) : nlohmann::json(nullptr)},
                     {"exact_loo", c.exact_loo},
                     {"full_fit", c.full_fit},
                     {"estimator", hope::to_json(c.estimator)},
                     {"sampler", hope::to_json(c.sampler)},
                     {"rng_algorithm", kRngAlgorithm}};
    return j;
}

// Fills fields whose flag was not given on the command line from a JSON config.
void apply_config(const CLI::App& app, RunConfig& c) {
    if (c.config_file.empty()) return;
    std::ifstream in(c.config_file);
    if (!in) throw UsageError("cannot open config file " + c.config_file);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + c.config_file + " is not valid JSON: " + e.what());
    }
    auto unset = [&](const char* flag) {
        try {
            return app.get_option(flag)->count() == 0;
        } catch (const CLI::OptionNotFound&) {
            return true;
        }
    };
    try {
        if (j.contains("dataset") && unset("dataset")) c.graph.dataset = j["dataset"].get<std::string>();
        if (j.contains("edges") && unset("--edges")) c.graph.edges = j["edges"].get<std::string>();
        if (j.contains("attributes") && unset("--attributes")) c.graph.attributes = j["attributes"].get<std::string>();
        if (j.contains("n") && unset("--n")) c.graph.n = j["n"].get<std::size_t>();
        if (j.contains("index_base") && unset("--index-base")) c.graph.index_base = j["index_base"].get<int>();
        if (j.contains("model") && unset("--model")) {
            c.models.clear();
            const auto& m = j["model"];
            if (m.is_string()) c.models.push_back(m.get<std::string>());
            else
                for (const auto& x : m) c.models.push_back(x.is_string() ? x.get<std::string>() : x.dump());
        }
        if (j.contains("strategy") && unset("--strategy")) {
            c.strategies.clear();
            const auto& s = j["strategy"];
            if (s.is_string()) c.strategies.push_back(s.get<std::string>());
            else
                for (const auto& x : s) c.strategies.push_back(x.get<std::string>());
        }
        if (j.contains("folds") && j["folds"].is_number() && unset("--folds")) c.folds = j["folds"].get<std::size_t>();
        if (j.contains("draws") && unset("--draws")) c.draws = j["draws"].get<std::size_t>();
        if (j.contains("seed") && unset("--seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workers") && unset("--workers")) c.workers = j["workers"].get<std::size_t>();
        if (j.contains("out") && unset("--out")) c.out = j["out"].get<std::string>();
        if (j.contains("free") && unset("--free")) c.free_file = j["free"].get<std::string>();
        if (j.contains("theta") && unset("--theta")) c.theta = j["theta"].get<std::string>();
        if (j.contains("subset") && j["subset"].is_number() && unset("--subset")) c.subset = j["subset"].get<std::size_t>();
        if (j.contains("exact_loo") && unset("--exact-loo")) c.exact_loo = j["exact_loo"].get<bool>();
        if (j.contains("estimator")) c.estimator = estimator_config_from_json(j["estimator"], c.estimator);
        if (j.contains("sampler")) c.sampler = sampler_config_from_json(j["sampler"], c.sampler);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + c.config_file + ": " + e.what());
    }
}

Graph load_input(const GraphArgs& a, std::string* name = nullptr) {
    if (!a.edges.empty() || (a.dataset.empty() && a.n > 0)) {
        if (a.n == 0) throw UsageError("--n is required with --edges");
        if (a.index_base != 0 && a.index_base != 1) throw UsageError("--index-base must be 0 or 1");
        if (name) *name = a.edges.empty() ? "empty" : fs::path(a.edges).stem().string();
        if (a.edges.empty()) return Graph(a.n);
        std::optional<fs::path> attrs;
        if (!a.attributes.empty()) attrs = a.attributes;
        return load_graph(a.edges, attrs, a.n, a.index_base);
    }
    if (a.dataset.empty()) throw UsageError("no input graph: give a dataset name/path or --edges with --n");
    fs::path p = a.dataset;
    if (!fs::exists(p)) {
        auto found = locate_dataset(a.dataset);
        if (!found)
            throw DataError("dataset not installed: '" + a.dataset +
                            "' was not found under $HOPE_DATA_DIR, ./data or the source data/ directory "
                            "(see data/README.md)");
        p = *found;
    }
    auto ds = load_dataset(p);
    if (name) *name = ds.name;
    return std::move(ds.graph);
}

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
    cmd->add_option("dataset", g.dataset, "Dataset name (under data/) or dataset directory");
    cmd->add_option("--edges", g.edges, "Edgelist file (alternative to a dataset)");
    cmd->add_option("--attributes", g.attributes, "Node attribute CSV for --edges");
    cmd->add_option("--n", g.n, "Node count for --edges");
    cmd->add_option("--index-base", g.index_base, "Index base of --edges/--free files (0 or 1)");
}

void add_estimator_options(CLI::App* cmd, RunConfig& c, std::string& method) {
    cmd->add_option("--method", method, "auto, mple, mcmle or exact");
    cmd->add_option("--mc-size", c.estimator.mc_sample_size, "MCMLE draws per iteration");
    cmd->add_option("--max-iter", c.estimator.max_iter, "MCMLE iteration limit");
    cmd->add_option("--tolerance", c.estimator.gradient_tolerance, "MCMLE standardized-score tolerance");
    cmd->add_option("--bridge-points", c.estimator.bridge_points, "Path-sampling points");
    cmd->add_option("--bridge-draws", c.estimator.bridge_sample_size, "Draws per path-sampling point");
}

void add_sampler_options(CLI::App* cmd, SamplerConfig& s, std::string& proposal) {
    cmd->add_option("--burn-in", s.burn_in, "Burn-in toggles (default 20 per free dyad)");
    cmd->add_option("--thin", s.thin, "Toggles between draws (default 4 per free dyad + 1)");
    cmd->add_option("--proposal", proposal, "uniform or tnt");
    cmd->add_option("--chains", s.chains, "Independent chains");
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

fs::path prepare_out(const std::string& out) {
    if (out.empty()) return {};
    fs::create_directories(out);
    return out;
}

Eigen::VectorXd parse_theta(const std::string& s, std::size_t p) {
    std::vector<double> v;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
        } catch (const std::exception&) {
            throw UsageError("--theta: '" + tok + "' is not a number");
        }
    }
    if (v.size() != p)
        throw UsageError("--theta has " + std::to_string(v.size()) + " values, model has " + std::to_string(p));
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int cmd_fit(RunConfig& c) {
    if (c.models.size() != 1) throw UsageError("fit takes exactly one --model");
    std::string name;
    const Graph g = load_input(c.graph, &name);
    const ModelSpec spec = parse_model_argument(c.models[0]);
    PartialGraph pg(g);
    if (!c.free_file.empty()) pg = PartialGraph(g, load_dyads(c.free_file, g.size(), c.graph.index_base));
    c.estimator.seed = c.seed;
    c.estimator.sampler.workers = c.workers;
    const FitResult f = fit(pg, spec, c.estimator);
    std::cout << "model: " << to_formula(spec) << "\ngraph: " << name << " (n = " << g.size()
              << ", edges = " << g.edge_count() << ")\n\n"
              << format_fit_table(f);
    if (auto dir = prepare_out(c.out); !dir.empty()) {
        auto j = hope::to_json(f);
        j["schema_version"] = kReportSchemaVersion;
        j["model"] = model_to_json(spec);
        j["formula"] = to_formula(spec);
        j["run_config"] = to_json(c);
        write_json(dir / "fit.json", j);
        std::ofstream(dir / "fit.txt") << format_fit_table(f);
    }
    return 0;
}

int cmd_simulate(RunConfig& c) {
    if (c.models.size() != 1) throw UsageError("simulate takes exactly one --model");
    const Graph g = load_input(c.graph);
    const ModelSpec spec = parse_model_argument(c.models[0]);
    const Model model(spec, g);
    Eigen::VectorXd theta;
    if (!c.theta.empty()) {
        theta = parse_theta(c.theta, model.dim());
    } else if (!c.fit_file.empty()) {
        std::ifstream in(c.fit_file);
        if (!in) throw UsageError("cannot open fit file " + c.fit_file);
        nlohmann::json j;
        in >> j;
        theta = fit_from_json(j).theta;
        if (static_cast<std::size_t>(theta.size()) != model.dim())
            throw UsageError("fit file coefficients do not match the model");
    } else {
        throw UsageError("simulate needs --theta or --fit");
    }
    const DyadSet free = c.free_file.empty() ? DyadSet::all(g.size()) : load_dyads(c.free_file, g.size(), c.graph.index_base);
    const PartialGraph pg(g, free);
    SamplerConfig sc = c.sampler;
    sc.seed = c.seed;
    sc.workers = c.workers;
    const auto draws = sample_conditional(pg, theta, model, c.draws, sc);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(theta.size());
    for (const auto& y : draws) mean += model.stats(y);
    mean /= static_cast<double>(draws.size());
    std::cout << "draws: " << draws.size() << "\nmean statistics:\n";
    for (std::size_t k = 0; k < model.dim(); ++k)
        std::cout << "  " << model.names()[k] << " = " << mean[static_cast<Eigen::Index>(k)] << '\n';

    if (auto dir = prepare_out(c.out); !dir.empty()) {
        std::ofstream stats(dir / "stats.csv");
        for (std::size_t k = 0; k < model.dim(); ++k) stats << (k ? "," : "") << model.names()[k];
        stats << '\n';
        stats.precision(17);
        std::ofstream edges(dir / "draws.txt");
        edges << "# draw i j (0-based); one block per draw\n";
        for (std::size_t b = 0; b < draws.size(); ++b) {
            const auto s = model.stats(draws[b]);
            for (Eigen::Index k = 0; k < s.size(); ++k) stats << (k ? "," : "") << s[k];
            stats << '\n';
            for (auto d : draws[b].edges()) edges << b << ' ' << d.i << ' ' << d.j << '\n';
        }
        write_json(dir / "simulate.json", {{"schema_version", kReportSchemaVersion},
                                           {"run_config", to_json(c)},
                                           {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())},
                                           {"names", model.names()}});
    }
    return 0;
}

FoldPlan make_plan(const Graph& g, const std::string& strategy, const RunConfig& c) {
    std::optional<DyadSet> subset;
    if (c.subset) subset = sample_subset(g.size(), *c.subset, c.seed);
    return build_partition(g, strategy_from_string(strategy), c.folds, c.seed, subset);
}

int cmd_hope(RunConfig& c) {
    if (c.models.empty()) throw UsageError("hope needs at least one --model");
    if (c.strategies.empty()) c.strategies = {"loo", "lmo", "node"};
    std::string name;
    const Graph g = load_input(c.graph, &name);
    std::vector<ModelSpec> specs;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        specs.push_back(parse_model_argument(c.models[i]));
        names.push_back("model" + std::to_string(i + 1));
    }
    HopeConfig hc;
    hc.draws = c.draws;
    hc.estimator = c.estimator;
    hc.sampler = c.sampler;
    hc.seed = c.seed;
    hc.workers = c.workers;
    hc.exact_loo_marginals = c.exact_loo;

    std::vector<std::optional<FitResult>> full(specs.size());
    if (c.full_fit) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            EstimatorConfig e = c.estimator;
            e.seed = derive_seed(c.seed, {0xf17, i});
            try {
                full[i] = fit(PartialGraph(g), specs[i], e);
            } catch (const EstimationError& err) {
                std::cerr << "warning: full-data fit of " << names[i] << " failed: " << err.what() << '\n';
            }
        }
    }

    std::vector<HopeReport> reports;
    bool partial_failure = false;
    for (const auto& s : c.strategies) {
        const auto t0 = std::chrono::steady_clock::now();
        FoldPlan plan = make_plan(g, s, c);
        const double part = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto r = run_hope(g, specs, plan, hc, names);
        r.timing.partition_seconds = part;
        for (const auto& m : r.models) partial_failure = partial_failure || m.failed_folds > 0;
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
        reports.push_back(std::move(r));
    }
    std::cout << "graph: " << name << " (n = " << g.size() << ", edges = " << g.edge_count() << "), B = " << c.draws
              << "\n";
    for (std::size_t i = 0; i < specs.size(); ++i) std::cout << names[i] << ": " << to_formula(specs[i]) << '\n';
    std::cout << '\n' << format_metric_table(reports);

    if (auto dir = prepare_out(c.out); !dir.empty()) {
        std::ofstream csv(dir / "metrics.csv");
        write_metric_csv(csv, reports, full);
        std::ofstream plot(dir / "plot_data.csv");
        write_plot_data(plot, reports);
        nlohmann::json j{{"schema_version", kReportSchemaVersion}, {"run_config", to_json(c)}};
        nlohmann::json fits = nlohmann::json::array();
        for (std::size_t i = 0; i < full.size(); ++i)
            fits.push_back(full[i] ? hope::to_json(*full[i]) : nlohmann::json(nullptr));
        j["full_data_fits"] = std::move(fits);
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : reports) rs.push_back(hope::to_json(r));
        j["reports"] = std::move(rs);
        write_json(dir / "report.json", j);
    }
    return partial_failure ? static_cast<int>(ExitCode::Estimation) : 0;
}

int cmd_verify(RunConfig& c) {
    std::string name;
    const Graph g = load_input(c.graph, &name);
    const auto* fx = find_fixture(name);
    if (!fx) fx = find_fixture(c.graph.dataset);
    if (!fx) throw UsageError("no reference statistics for dataset '" + name + "' (known: lazega, teenage)");
    const auto r = verify_dataset(g, *fx);
    std::cout << "dataset: " << fx->name << '\n' << format_verify(r);
    return r.ok ? 0 : static_cast<int>(ExitCode::Data);
}

int cmd_partition(RunConfig& c) {
    const Graph g = load_input(c.graph);
    const std::string s = c.strategies.empty() ? "lmo" : c.strategies.front();
    const FoldPlan plan = make_plan(g, s, c);
    auto j = hope::to_json(plan);
    j["schema_version"] = kReportSchemaVersion;
    j["run_config"] = to_json(c);
    if (auto dir = prepare_out(c.out); !dir.empty()) write_json(dir / "partition.json", j);
    else std::cout << j.dump(2) << '\n';
    std::cerr << plan.size() << " folds\n";
    return 0;
}

int check_fixtures() {
    bool ok = true;
    for (const auto& fx : dataset_fixtures()) {
        auto p = locate_dataset(fx.name);
        if (!p) {
            std::cout << fx.name << ": dataset not installed (expected data/" << fx.name
                      << "/dataset.json; see data/README.md)\n";
            ok = false;
            continue;
        }
        const auto r = verify_dataset(load_dataset(*p).graph, fx);
        std::cout << fx.name << ": " << (r.ok ? "installed, descriptives match" : "installed, descriptives DIFFER")
                  << '\n';
        if (!r.ok) std::cout << format_verify(r);
        ok = ok && r.ok;
    }
    return ok ? 0 : static_cast<int>(ExitCode::Data);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Held-out predictive evaluation for exponential random graph models"};
    app.set_version_flag("--version", "hope 1.0");
    RunConfig c;
    std::string method, proposal;
    bool fixtures = false;
    app.add_flag("--check-fixtures", fixtures, "Report whether the case-study datasets are installed and verified");

    auto common = [&](CLI::App* cmd) {
        add_graph_options(cmd, c.graph);
        cmd->add_option("--seed", c.seed, "Master seed");
        cmd->add_option("--workers", c.workers, "Worker threads");
        cmd->add_option("--out", c.out, "Output directory");
        cmd->add_option("--config", c.config_file, "JSON config mirroring the flags");
    };

    auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a (partially observed) network");
    common(fit_cmd);
    fit_cmd->add_option("--model", c.models, "Model: JSON file, inline JSON or formula");
    fit_cmd->add_option("--free", c.free_file, "Dyads to treat as unobserved");
    add_estimator_options(fit_cmd, c, method);
    add_sampler_options(fit_cmd, c.estimator.sampler, proposal);

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate graphs, optionally conditional on observed dyads");
    common(sim_cmd);
    sim_cmd->add_option("--model", c.models, "Model: JSON file, inline JSON or formula");
    sim_cmd->add_option("--theta", c.theta, "Comma-separated coefficients");
    sim_cmd->add_option("--fit", c.fit_file, "fit.json from a previous fit");
    sim_cmd->add_option("--free", c.free_file, "Dyads to simulate (default: all)");
    sim_cmd->add_option("--draws", c.draws, "Number of draws B");
    add_sampler_options(sim_cmd, c.sampler, proposal);

    auto* hope_cmd = app.add_subcommand("hope", "Held-out predictive evaluation of one or more models");
    common(hope_cmd);
    hope_cmd->add_option("--model", c.models, "Model (repeatable)");
    hope_cmd->add_option("--strategy", c.strategies, "loo, lmo, node (repeatable; default all)");
    hope_cmd->add_option("--folds", c.folds, "M for leave-M-out (default n - 1)");
    hope_cmd->add_option("--draws", c.draws, "Conditional draws B per fold");
    hope_cmd->add_option("--subset", c.subset, "Evaluate a uniform random subset of this many dyads");
    hope_cmd->add_flag("--exact-loo", c.exact_loo, "Exact change-score marginals for dyad-independent leave-1-out");
    hope_cmd->add_flag("!--no-full-fit", c.full_fit, "Skip the full-data fits that supply AIC/BIC");
    add_estimator_options(hope_cmd, c, method);
    add_sampler_options(hope_cmd, c.sampler, proposal);

    auto* verify_cmd = app.add_subcommand("verify-dataset", "Compare a dataset's descriptives with the reference table");
    add_graph_options(verify_cmd, c.graph);

    auto* part_cmd = app.add_subcommand("partition", "Build and print a fold plan");
    common(part_cmd);
    part_cmd->add_option("--strategy", c.strategies, "loo, lmo or node");
    part_cmd->add_option("--folds", c.folds, "M for leave-M-out");
    part_cmd->add_option("--subset", c.subset, "Restrict to a uniform random subset of dyads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }

    try {
        if (fixtures) return check_fixtures();
        CLI::App* chosen = nullptr;
        for (auto* s : app.get_subcommands()) chosen = s;
        if (!chosen) {
            std::cerr << app.help();
            return static_cast<int>(ExitCode::Usage);
        }
        apply_config(*chosen, c);
        if (!method.empty()) c.estimator.method = method_from_string(method);
        if (!proposal.empty()) {
            c.sampler.proposal = proposal_from_string(proposal);
            c.estimator.sampler.proposal = c.sampler.proposal;
        }
        if (chosen == fit_cmd) return cmd_fit(c);
        if (chosen == sim_cmd) return cmd_simulate(c);
        if (chosen == hope_cmd) return cmd_hope(c);
        if (chosen == verify_cmd) return cmd_verify(c);
        return cmd_partition(c);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Data);
    } catch (const BoundaryError& e) {
        std::cerr << "estimation error (boundary MLE): " << e.what() << '\n';
        return static_cast<int>(ExitCode::Estimation);
    } catch (const EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << '\n';
        for (const auto& line : e.trace()) std::cerr << "  " << line << '\n';
        return static_cast<int>(ExitCode::Estimation);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    }
}
