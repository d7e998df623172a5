#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef RKHS_DAGMA_VERSION
#define RKHS_DAGMA_VERSION "unknown"
#endif

namespace rkhs_dagma::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json vector_json(const Vector& v) {
    return json(std::vector<double>(v.begin(), v.end()));
}

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        rows.push_back(vector_json(M.row(i).transpose()));
    }
    return rows;
}

Vector vector_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix matrix_from(const json& j) {
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows ? static_cast<Index>(j.at(0).size()) : 0;
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != cols) {
            throw DataError("ragged matrix in model file");
        }
        for (Index c = 0; c < cols; ++c) {
            M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return M;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create output directory " + dir.string());
    }
}

DataMatrix read_data(const fs::path& path) {
    const io::Table t = io::read_table(path);
    if (t.values.rows() == 0) {
        throw DataError(path.string() + ": no data rows");
    }
    if (!t.values.allFinite()) {
        throw DataError(path.string() + ": non-finite values");
    }
    return t.values;
}

void add_config_options(CLI::App& app, DagmaConfig& cfg, double& gamma, bool& no_escalate,
                        bool& standardize) {
    app.add_option("--mu0", cfg.mu0, "Initial path coefficient")->capture_default_str();
    app.add_option("--decay", cfg.decay, "Path decay factor in (0, 1)")->capture_default_str();
    app.add_option("--tau", cfg.tau, "Sparsity weight")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "RKHS norm weight")->capture_default_str();
    app.add_option("--s", cfg.s, "Log-det parameter")->capture_default_str();
    app.add_option("--T", cfg.T, "Outer rounds")->capture_default_str();
    app.add_option("--omega", cfg.omega, "Edge threshold")->capture_default_str();
    app.add_option("--gamma", gamma, "Kernel bandwidth (default 0.4 d)");
    app.add_option("--lr", cfg.adam.learning_rate, "ADAM learning rate")->capture_default_str();
    app.add_option("--beta1", cfg.adam.beta1, "ADAM beta1")->capture_default_str();
    app.add_option("--beta2", cfg.adam.beta2, "ADAM beta2")->capture_default_str();
    app.add_option("--adam-eps", cfg.adam.epsilon, "ADAM epsilon")->capture_default_str();
    app.add_option("--max-iter", cfg.adam.max_iterations, "ADAM iterations per round")
        ->capture_default_str();
    app.add_flag("--no-escalate", no_escalate, "Skip the extra round on a cyclic result");
    app.add_flag("--standardize", standardize, "Standardize columns before fitting");
}

void finish_config(DagmaConfig& cfg, const CLI::App& app, double gamma, bool no_escalate,
                   bool standardize) {
    if (app.count("--gamma") > 0) {
        cfg.gamma = gamma;
    }
    cfg.escalate_on_cycle = !no_escalate;
    cfg.standardize = standardize;
    cfg.threads = threads_from_env(1);
    cfg.validate();
}

Direction direction_from_meta(const std::vector<double>& f, bool& multi) {
    const auto c0 = static_cast<long>(f[1]);
    const auto c1 = static_cast<long>(f[2]);
    const auto e0 = static_cast<long>(f[3]);
    const auto e1 = static_cast<long>(f[4]);
    multi = c0 != c1 || e0 != e1;
    if (multi) {
        return Direction::Undecided;
    }
    if (c0 == 1 && e0 == 2) {
        return Direction::AtoB;
    }
    if (c0 == 2 && e0 == 1) {
        return Direction::BtoA;
    }
    throw DataError("pair metadata names columns other than 1 and 2");
}

struct MetaEntry {
    std::string id;
    Direction truth = Direction::AtoB;
    double weight = 1.0;
    bool multi = false;
};

std::vector<MetaEntry> read_meta(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("missing pairs metadata " + path.string());
    }
    std::vector<MetaEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        MetaEntry e;
        if (!(ss >> e.id)) {
            continue;
        }
        std::vector<double> f(6, 1.0);
        f[0] = 0.0;
        std::size_t got = 1;
        for (double v = 0.0; got < 6 && ss >> v; ++got) {
            f[got] = v;
        }
        if (got < 5) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected id, cause range, effect range and optional weight");
        }
        e.truth = direction_from_meta(f, e.multi);
        e.weight = f[5];
        if (!(e.weight >= 0.0)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": negative weight");
        }
        entries.push_back(e);
    }
    return entries;
}

}  // namespace

unsigned threads_from_env(unsigned fallback) {
    const char* raw = std::getenv("RKHS_DAGMA_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return fallback;
    }
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (*end != '\0' || v < 0) {
        throw InvalidArgument(std::string("RKHS_DAGMA_THREADS must be a nonnegative integer, got ") +
                              raw);
    }
    return static_cast<unsigned>(v);
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = RKHS_DAGMA_VERSION;
    j["config"] = config;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["duration_seconds"] = duration_seconds;
    return j;
}

void RunManifest::write(const fs::path& path) const { write_json(path, to_json()); }

json to_json(const DagmaConfig& cfg) {
    return {
        {"mu0", cfg.mu0},
        {"decay", cfg.decay},
        {"tau", cfg.tau},
        {"lambda", cfg.lambda},
        {"s", cfg.s},
        {"T", cfg.T},
        {"escalate_on_cycle", cfg.escalate_on_cycle},
        {"omega", cfg.omega},
        {"gamma", cfg.gamma ? json(*cfg.gamma) : json(nullptr)},
        {"standardize", cfg.standardize},
        {"norm_smoothing", cfg.norm_smoothing},
        {"constrain_unsquared", cfg.constrain_unsquared},
        {"threads", cfg.threads},
        {"adam",
         {{"learning_rate", cfg.adam.learning_rate},
          {"beta1", cfg.adam.beta1},
          {"beta2", cfg.adam.beta2},
          {"epsilon", cfg.adam.epsilon},
          {"max_iterations", cfg.adam.max_iterations},
          {"gradient_tolerance", cfg.adam.gradient_tolerance},
          {"max_rejections", cfg.adam.max_rejections}}},
    };
}

json to_json(const ObjectiveReport& r) {
    return {
        {"fit", r.fit},
        {"sparsity", r.sparsity},
        {"complexity", r.complexity},
        {"penalized", r.penalized},
        {"h_value", std::isfinite(r.h_value) ? json(r.h_value) : json(nullptr)},
        {"in_domain", r.in_domain},
        {"W", matrix_json(r.W)},
    };
}

json to_json(const SemSpec& spec) {
    return {{"d", spec.d},
            {"m", spec.m},
            {"mechanism", to_string(spec.mechanism)},
            {"n", spec.n},
            {"seed", spec.seed}};
}

json model_to_json(const DiscoveryResult& result) {
    json nodes = json::array();
    for (const auto& node : result.theta.nodes) {
        nodes.push_back({{"alpha", vector_json(node.alpha)}, {"beta", matrix_json(node.beta)}});
    }
    return {
        {"n", result.theta.nodes.empty() ? 0 : result.theta.nodes.front().n()},
        {"d", result.theta.d()},
        {"gamma", result.gamma},
        {"column_mean", vector_json(result.column_mean)},
        {"column_scale", vector_json(result.column_scale)},
        {"nodes", nodes},
    };
}

SavedModel model_from_json(const json& j) {
    try {
        SavedModel m;
        m.gamma = j.at("gamma").get<double>();
        m.column_mean = vector_from(j.at("column_mean"));
        m.column_scale = vector_from(j.at("column_scale"));
        const auto n = j.at("n").get<Index>();
        const auto d = j.at("d").get<Index>();
        for (const auto& node : j.at("nodes")) {
            NodeParams p(vector_from(node.at("alpha")), matrix_from(node.at("beta")));
            if (p.n() != n || p.d() != d) {
                throw DataError("model node has the wrong shape");
            }
            m.theta.nodes.push_back(std::move(p));
        }
        if (m.theta.d() != d || m.column_mean.size() != d || m.column_scale.size() != d) {
            throw DataError("model file is inconsistent with d = " + std::to_string(d));
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

SimulatedDataset cmd_simulate(const SimulateOptions& opt) {
    const auto start = Clock::now();
    opt.spec.validate();
    ensure_dir(opt.out_dir);
    SimulatedDataset data = simulate_sem(opt.spec);
    io::write_matrix(opt.out_dir / "data.csv", data.X);
    io::write_edge_list(opt.out_dir / "truth_dag.csv", data.dag);

    RunManifest m;
    m.command = "simulate";
    m.config = to_json(opt.spec);
    m.seed = opt.spec.seed;
    m.outputs = {"data.csv", "truth_dag.csv"};
    m.duration_seconds = seconds_since(start);
    m.write(opt.out_dir / "manifest.json");
    return data;
}

DiscoveryResult cmd_discover(const DiscoverOptions& opt) {
    const auto start = Clock::now();
    opt.cfg.validate();
    const DataMatrix X = read_data(opt.data);
    if (X.cols() < 2) {
        throw InvalidArgument(opt.data.string() + ": discovery needs at least two columns");
    }
    ensure_dir(opt.out_dir);
    DiscoveryResult result = discover(X, opt.cfg);

    io::write_matrix(opt.out_dir / "W_raw.csv", result.W_raw);
    io::write_matrix(opt.out_dir / "W_hat.csv", result.W_hat);
    io::write_edge_list(opt.out_dir / "graph.csv", result.graph);
    json trace = json::array();
    for (const auto& t : result.trace) {
        json entry = to_json(t.report);
        entry["round"] = t.round;
        entry["mu"] = t.mu;
        entry["iterations"] = t.iterations;
        entry["rejections"] = t.rejections;
        entry["final_learning_rate"] = t.final_learning_rate;
        entry["central_path_value"] = t.central_path_value;
        entry["start_checksum"] = t.start_checksum;
        entry["end_checksum"] = t.end_checksum;
        trace.push_back(std::move(entry));
    }
    write_json(opt.out_dir / "trace.json", {{"is_dag", result.is_dag_flag}, {"rounds", trace}});
    write_json(opt.out_dir / "model.json", model_to_json(result));

    RunManifest m;
    m.command = "discover";
    m.config = to_json(opt.cfg);
    m.inputs = {{"data", opt.data.string()}};
    m.outputs = {"W_raw.csv", "W_hat.csv", "graph.csv", "trace.json", "model.json"};
    m.duration_seconds = seconds_since(start);
    m.write(opt.out_dir / "manifest.json");
    return result;
}

json cmd_evaluate(const EvaluateOptions& opt) {
    const auto start = Clock::now();
    const DirectedGraph truth = io::read_edge_list(opt.truth);
    const Index d = truth.size();
    const DirectedGraph est = io::read_edge_list(opt.graph, d);
    const EvalReport r = shd(est, truth);
    json report = {{"shd", r.shd},
                   {"extra", r.extra},
                   {"missing", r.missing},
                   {"reversed", r.reversed},
                   {"predicted_edges", r.predicted_edges},
                   {"true_edges", r.true_edges}};
    if (!opt.out_dir.empty()) {
        ensure_dir(opt.out_dir);
        RunManifest m;
        m.command = "evaluate";
        m.config = json::object();
        m.inputs = {{"graph", opt.graph.string()}, {"truth", opt.truth.string()}};
        m.duration_seconds = seconds_since(start);
        m.write(opt.out_dir / "manifest.json");
    }
    return report;
}

json PairsReport::to_json() const {
    json list = json::array();
    for (const auto& d : decisions) {
        list.push_back({{"id", d.id},
                        {"truth", to_string(d.truth)},
                        {"decision", to_string(d.decided)},
                        {"tiebreak", d.tiebreak},
                        {"correct", d.decided == d.truth},
                        {"weight", d.weight},
                        {"W_ab", d.w_ab},
                        {"W_ba", d.w_ba}});
    }
    return {{"pairs", list},
            {"skipped", skipped},
            {"evaluated", decisions.size()},
            {"accuracy", accuracy},
            {"weighted_accuracy", weighted_accuracy}};
}

PairsReport cmd_pairs(const PairsOptions& opt, std::ostream& log) {
    const auto start = Clock::now();
    opt.cfg.validate();
    const auto meta = read_meta(opt.corpus / opt.meta);

    PairsReport report;
    std::vector<MetaEntry> todo;
    for (const auto& e : meta) {
        if (e.multi) {
            log << "skipping pair " << e.id << ": multi-dimensional variables\n";
            report.skipped.push_back(e.id);
        } else {
            todo.push_back(e);
        }
    }
    if (todo.empty()) {
        throw DataError("pairs corpus " + opt.corpus.string() + " has no usable pairs");
    }

    std::vector<PairDataset> inputs;
    for (const auto& e : todo) {
        const DataMatrix X = read_data(opt.corpus / ("pair" + e.id + ".txt"));
        if (X.cols() != 2) {
            throw DataError("pair " + e.id + " has " + std::to_string(X.cols()) +
                            " columns, expected 2");
        }
        PairDataset p;
        p.a = X.col(0);
        p.b = X.col(1);
        p.label = e.truth;
        p.weight = e.weight;
        inputs.push_back(pairs_preprocess(p));
    }

    report.decisions.resize(todo.size());
    DagmaConfig cfg = opt.cfg;
    cfg.threads = 1;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) {
            try {
                const Orientation o = orient_pair(inputs[i], cfg);
                auto& d = report.decisions[i];
                d.id = todo[i].id;
                d.truth = todo[i].truth;
                d.weight = todo[i].weight;
                d.decided = o.direction;
                d.tiebreak = o.tiebreak;
                d.w_ab = o.W_raw(0, 1);
                d.w_ba = o.W_raw(1, 0);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const unsigned workers =
        std::max(1u, std::min<unsigned>(opt.workers == 0 ? std::thread::hardware_concurrency()
                                                         : opt.workers,
                                        static_cast<unsigned>(todo.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    double correct = 0.0;
    double weighted = 0.0;
    double total_weight = 0.0;
    for (const auto& d : report.decisions) {
        const bool ok = d.decided == d.truth;
        correct += ok ? 1.0 : 0.0;
        weighted += ok ? d.weight : 0.0;
        total_weight += d.weight;
    }
    report.accuracy = correct / static_cast<double>(report.decisions.size());
    report.weighted_accuracy = total_weight > 0.0 ? weighted / total_weight : 0.0;

    if (!opt.out_dir.empty()) {
        ensure_dir(opt.out_dir);
        write_json(opt.out_dir / "report.json", report.to_json());
        RunManifest m;
        m.command = "pairs";
        m.config = to_json(opt.cfg);
        m.config["workers"] = opt.workers;
        m.inputs = {{"corpus", opt.corpus.string()}, {"meta", opt.meta}};
        m.outputs = {"report.json"};
        m.duration_seconds = seconds_since(start);
        m.write(opt.out_dir / "manifest.json");
    }
    return report;
}

Matrix cmd_toyplot(const ToyplotOptions& opt) {
    const auto start = Clock::now();
    if (opt.points < 2) {
        throw InvalidArgument("toyplot needs at least two grid points");
    }
    const DataMatrix X = read_data(opt.data);
    if (X.cols() != 2) {
        throw InvalidArgument(opt.data.string() + ": toyplot needs exactly two columns");
    }
    std::ifstream in(opt.model);
    if (!in) {
        throw DataError("cannot open model " + opt.model.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(opt.model.string() + ": " + e.what());
    }
    const SavedModel model = model_from_json(j);
    if (model.theta.d() != 2 || model.theta.nodes.front().n() != X.rows()) {
        throw InvalidArgument("model shape " + std::to_string(model.theta.nodes.front().n()) + "x" +
                              std::to_string(model.theta.d()) + " does not match data " +
                              std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
    }
    const DataMatrix fitted =
        (X.rowwise() - model.column_mean.transpose()).array().rowwise() /
        model.column_scale.transpose().array();

    const Vector grid =
        Vector::LinSpaced(opt.points, X.col(0).minCoeff(), X.col(0).maxCoeff());
    Matrix out(opt.points, 2);
    const KernelConfig kc{model.gamma};
    Vector point = Vector::Zero(2);
    for (Index g = 0; g < opt.points; ++g) {
        point(0) = (grid(g) - model.column_mean(0)) / model.column_scale(0);
        const double f = eval_node_at(model.theta.nodes[1], fitted, point, kc, 1);
        out(g, 0) = grid(g);
        out(g, 1) = f * model.column_scale(1) + model.column_mean(1);
    }
    if (!opt.out.empty()) {
        if (opt.out.has_parent_path()) {
            ensure_dir(opt.out.parent_path());
        }
        io::write_matrix(opt.out, out, {"x", "f_hat"});
        RunManifest m;
        m.command = "toyplot";
        m.config = {{"points", opt.points}};
        m.inputs = {{"data", opt.data.string()}, {"model", opt.model.string()}};
        m.outputs = {opt.out.filename().string()};
        m.duration_seconds = seconds_since(start);
        m.write(opt.out.parent_path() / (opt.out.stem().string() + ".manifest.json"));
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nonlinear causal structure learning with RKHS-DAGMA"};
    app.require_subcommand(1);

    SimulateOptions sim;
    std::string mechanism = to_string(sim.spec.mechanism);
    auto* simulate = app.add_subcommand("simulate", "Draw a random DAG and simulate data");
    simulate->add_option("--d", sim.spec.d, "Number of variables")->capture_default_str();
    simulate->add_option("--m", sim.spec.m, "Expected edges per node")->capture_default_str();
    simulate->add_option("--mechanism", mechanism, "gp, gp-additive, mlp or combinatorial")
        ->capture_default_str();
    simulate->add_option("--n", sim.spec.n, "Number of samples")->capture_default_str();
    simulate->add_option("--seed", sim.spec.seed, "Random seed")->capture_default_str();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();

    DiscoverOptions disc;
    double disc_gamma = 0.0;
    bool disc_no_escalate = false;
    bool disc_standardize = false;
    auto* discover_cmd = app.add_subcommand("discover", "Learn a DAG from a data CSV");
    discover_cmd->add_option("--data", disc.data, "Numeric CSV, one column per variable")
        ->required();
    discover_cmd->add_option("--out", disc.out_dir, "Output directory")->required();
    add_config_options(*discover_cmd, disc.cfg, disc_gamma, disc_no_escalate, disc_standardize);

    EvaluateOptions eval;
    auto* evaluate = app.add_subcommand("evaluate", "Structural Hamming distance of two edge lists");
    evaluate->add_option("--graph", eval.graph, "Estimated edge list")->required();
    evaluate->add_option("--truth", eval.truth, "True edge list")->required();
    evaluate->add_option("--out", eval.out_dir, "Directory for manifest.json");

    PairsOptions pairs;
    double pairs_gamma = 0.0;
    bool pairs_no_escalate = false;
    bool pairs_standardize = false;
    auto* pairs_cmd = app.add_subcommand("pairs", "Orient every pair of a cause-effect corpus");
    pairs_cmd->add_option("--corpus", pairs.corpus, "Corpus directory")->required();
    pairs_cmd->add_option("--meta", pairs.meta, "Metadata file inside the corpus")
        ->capture_default_str();
    pairs_cmd->add_option("--out", pairs.out_dir, "Directory for report.json and manifest.json");
    add_config_options(*pairs_cmd, pairs.cfg, pairs_gamma, pairs_no_escalate, pairs_standardize);

    ToyplotOptions toy;
    auto* toyplot = app.add_subcommand("toyplot", "Fitted curve of a two-variable model");
    toyplot->add_option("--data", toy.data, "Data CSV the model was fitted on")->required();
    toyplot->add_option("--model", toy.model, "model.json written by discover")->required();
    toyplot->add_option("--out", toy.out, "Output CSV")->required();
    toyplot->add_option("--points", toy.points, "Grid size")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*simulate) {
            sim.spec.mechanism = parse_mechanism(mechanism);
            cmd_simulate(sim);
            return kOk;
        }
        if (*discover_cmd) {
            finish_config(disc.cfg, *discover_cmd, disc_gamma, disc_no_escalate, disc_standardize);
            const DiscoveryResult r = cmd_discover(disc);
            if (!r.is_dag_flag) {
                err << "result graph has a cycle\n";
                return kNotDag;
            }
            return kOk;
        }
        if (*evaluate) {
            out << cmd_evaluate(eval).dump(2) << '\n';
            return kOk;
        }
        if (*pairs_cmd) {
            finish_config(pairs.cfg, *pairs_cmd, pairs_gamma, pairs_no_escalate,
                          pairs_standardize);
            pairs.workers = pairs.cfg.threads;
            out << cmd_pairs(pairs, err).to_json().dump(2) << '\n';
            return kOk;
        }
        if (*toyplot) {
            cmd_toyplot(toy);
            return kOk;
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const OptimizationError& e) {
        err << "optimization failed: " << e.what() << '\n';
        return kOptimizationError;
    } catch (const OutOfDomainError& e) {
        err << "optimization failed: " << e.what() << '\n';
        return kOptimizationError;
    }
    return kUsage;
}

}  // namespace rkhs_dagma::cli
