#include "cli.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace rkhs_dagma {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("rkhs_dagma_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    fs::path write_matrix(const std::string& name, const Matrix& M) const {
        const fs::path p = dir_ / name;
        io::write_matrix(p, M);
        return p;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

const std::vector<std::string> kQuick = {"--max-iter", "200", "--T", "2"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Matrix sine_pair(Index n, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> noise;
    Matrix X(n, 2);
    for (Index i = 0; i < n; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = 10.0 * std::sin(X(i, 0)) + noise(rng);
    }
    return X;
}

Matrix quadratic_pair(Index n, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::normal_distribution<double> noise;
    Matrix X(n, 2);
    for (Index i = 0; i < n; ++i) {
        X(i, 0) = u(rng);
        X(i, 1) = X(i, 0) * X(i, 0) + noise(rng);
    }
    return X;
}

TEST_F(CliTest, SimulateWritesDataTruthAndManifest) {
    const auto out = (dir_ / "sim").string();
    ASSERT_EQ(run({"simulate", "--d", "2", "--m", "1", "--mechanism", "combinatorial", "--n", "100",
                   "--seed", "7", "--out", out}),
              0)
        << err_.str();
    const auto data = io::read_table(dir_ / "sim" / "data.csv");
    EXPECT_EQ(data.header, io::default_header(2));
    EXPECT_EQ(data.values.rows(), 100);
    EXPECT_EQ(data.values.cols(), 2);
    EXPECT_EQ(io::read_edge_list(dir_ / "sim" / "truth_dag.csv", 2).edge_count(), 1u);

    SemSpec spec;
    spec.d = 2;
    spec.m = 1.0;
    spec.mechanism = Mechanism::Combinatorial;
    spec.n = 100;
    spec.seed = 7;
    EXPECT_EQ(data.values, simulate_sem(spec).X);

    const auto manifest = cli::json::parse(slurp(dir_ / "sim" / "manifest.json"));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["seed"], 7);
    EXPECT_EQ(manifest["config"]["mechanism"], "combinatorial");

    const std::string first = slurp(dir_ / "sim" / "data.csv");
    ASSERT_EQ(run({"simulate", "--d", "2", "--m", "1", "--mechanism", "combinatorial", "--n", "100",
                   "--seed", "7", "--out", out}),
              0);
    EXPECT_EQ(slurp(dir_ / "sim" / "data.csv"), first);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({"simulate", "--mechanism", "bogus", "--out", dir_.string()}), cli::kUsage);
    EXPECT_EQ(run({}), cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
    EXPECT_EQ(run({"simulate", "--d", "1", "--out", dir_.string()}), cli::kUsage);
    const auto one = write_matrix("one.csv", Matrix::Ones(5, 1));
    EXPECT_EQ(run({"discover", "--data", one.string(), "--out", (dir_ / "d").string()}),
              cli::kUsage);
    EXPECT_EQ(run({"discover", "--data", one.string(), "--out", (dir_ / "d").string(), "--decay",
                   "2"}),
              cli::kUsage);
    EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, DataErrors) {
    const fs::path bad = dir_ / "bad.csv";
    std::ofstream(bad) << "X1,X2\n1,2\n3,oops\n";
    EXPECT_EQ(run({"discover", "--data", bad.string(), "--out", (dir_ / "d").string()}),
              cli::kDataError);
    EXPECT_NE(err_.str().find(":3:"), std::string::npos) << err_.str();
    EXPECT_EQ(run({"discover", "--data", (dir_ / "none.csv").string(), "--out",
                   (dir_ / "d").string()}),
              cli::kDataError);
}

TEST_F(CliTest, ThreadsEnvironmentIsValidated) {
    const auto data = write_matrix("q.csv", quadratic_pair(10, 1));
    ::setenv("RKHS_DAGMA_THREADS", "lots", 1);
    EXPECT_EQ(run(with({"discover", "--data", data.string(), "--out", (dir_ / "d").string()}, kQuick)),
              cli::kUsage);
    ::setenv("RKHS_DAGMA_THREADS", "2", 1);
    EXPECT_EQ(cli::threads_from_env(), 2u);
    ::unsetenv("RKHS_DAGMA_THREADS");
    EXPECT_EQ(cli::threads_from_env(5), 5u);
}

TEST_F(CliTest, DiscoverOutputsAndDeterminism) {
    const auto data = write_matrix("q.csv", quadratic_pair(40, 2));
    const auto a = (dir_ / "a").string();
    const auto b = (dir_ / "b").string();
    const int code = run(with({"discover", "--data", data.string(), "--out", a}, kQuick));
    ASSERT_TRUE(code == cli::kOk || code == cli::kNotDag) << err_.str();
    ASSERT_EQ(run(with({"discover", "--data", data.string(), "--out", b}, kQuick)), code);
    for (const char* f : {"W_raw.csv", "W_hat.csv", "graph.csv", "trace.json", "model.json",
                          "manifest.json"}) {
        EXPECT_TRUE(fs::exists(fs::path(a) / f)) << f;
    }
    EXPECT_EQ(slurp(fs::path(a) / "W_raw.csv"), slurp(fs::path(b) / "W_raw.csv"));

    const Matrix W_raw = io::read_table(fs::path(a) / "W_raw.csv").values;
    const Matrix W_hat = io::read_table(fs::path(a) / "W_hat.csv").values;
    EXPECT_EQ(W_hat, threshold(W_raw, 0.1).first);
    const DirectedGraph g = io::read_edge_list(fs::path(a) / "graph.csv", 2);
    EXPECT_EQ(g, threshold(W_raw, 0.1).second);
    EXPECT_EQ(code == cli::kOk, is_dag(g));

    const auto trace = cli::json::parse(slurp(fs::path(a) / "trace.json"));
    EXPECT_EQ(trace["is_dag"], code == cli::kOk);
    ASSERT_GE(trace["rounds"].size(), 2u);
    EXPECT_EQ(trace["rounds"][1]["mu"], 0.1);
    for (const char* key : {"fit", "sparsity", "complexity", "penalized", "h_value", "W"}) {
        EXPECT_TRUE(trace["rounds"][0].contains(key)) << key;
    }

    const auto manifest = cli::json::parse(slurp(fs::path(a) / "manifest.json"));
    EXPECT_EQ(manifest["config"]["T"], 2);
    EXPECT_EQ(manifest["config"]["adam"]["max_iterations"], 200);
}

TEST_F(CliTest, ModelRoundTripMatchesDiscovery) {
    const Matrix X = quadratic_pair(20, 3);
    DagmaConfig cfg;
    cfg.adam.max_iterations = 50;
    cfg.T = 1;
    cfg.standardize = true;
    const DiscoveryResult r = discover(X, cfg);
    const cli::SavedModel m = cli::model_from_json(cli::json::parse(cli::model_to_json(r).dump()));
    EXPECT_EQ(m.theta.flatten(), r.theta.flatten());
    EXPECT_EQ(m.column_mean, r.column_mean);
    EXPECT_EQ(m.column_scale, r.column_scale);
    EXPECT_EQ(m.gamma, r.gamma);
    EXPECT_THROW(cli::model_from_json(cli::json::parse("{\"gamma\": 1}")), DataError);
}

TEST_F(CliTest, QuadraticToyGraphIsSingleEdge) {
    const auto data = write_matrix("toy.csv", quadratic_pair(100, 11));
    ASSERT_EQ(run({"discover", "--data", data.string(), "--out", (dir_ / "toy").string()}), 0)
        << err_.str();
    DirectedGraph want(2);
    want.add_edge(0, 1);
    EXPECT_EQ(io::read_edge_list(dir_ / "toy" / "graph.csv", 2), want);
}

TEST_F(CliTest, EvaluateReportsShd) {
    oracle::Rng rng(4);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 10; ++trial) {
        DirectedGraph est(5);
        DirectedGraph truth(5);
        for (Index k = 0; k < 5; ++k) {
            for (Index j = 0; j < 5; ++j) {
                if (k != j && coin(rng)) {
                    est.add_edge(k, j);
                }
                if (k < j && coin(rng)) {
                    truth.add_edge(k, j);
                }
            }
        }
        truth.add_edge(3, 4);
        io::write_edge_list(dir_ / "est.csv", est);
        io::write_edge_list(dir_ / "truth.csv", truth);
        ASSERT_EQ(run({"evaluate", "--graph", (dir_ / "est.csv").string(), "--truth",
                       (dir_ / "truth.csv").string()}),
                  0);
        const auto j = cli::json::parse(out_.str());
        const EvalReport want = shd(est, truth);
        EXPECT_EQ(j["shd"], want.shd);
        EXPECT_EQ(j["extra"], want.extra);
        EXPECT_EQ(j["missing"], want.missing);
        EXPECT_EQ(j["reversed"], want.reversed);
    }
    io::write_edge_list(dir_ / "truth.csv", DirectedGraph(3));
    EXPECT_EQ(run({"evaluate", "--graph", (dir_ / "truth.csv").string(), "--truth",
                   (dir_ / "truth.csv").string(), "--out", (dir_ / "ev").string()}),
              0);
    EXPECT_TRUE(fs::exists(dir_ / "ev" / "manifest.json"));
}

TEST_F(CliTest, EvaluateEmptyAgainstFortyEdges) {
    oracle::Rng rng(5);
    DirectedGraph truth;
    do {
        truth = er_dag(10, 4.0, rng);
    } while (truth.edge_count() != 40);
    io::write_edge_list(dir_ / "truth.csv", truth);
    std::ofstream(dir_ / "empty.csv") << "src,dst\n";
    ASSERT_EQ(run({"evaluate", "--graph", (dir_ / "empty.csv").string(), "--truth",
                   (dir_ / "truth.csv").string()}),
              0)
        << err_.str();
    EXPECT_EQ(cli::json::parse(out_.str())["shd"], 40);
    EXPECT_EQ(cli::json::parse(out_.str())["missing"], 40);
}

void write_pair(const fs::path& dir, const std::string& id, const Matrix& X) {
    std::ofstream out(dir / ("pair" + id + ".txt"));
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index c = 0; c < X.cols(); ++c) {
            out << (c ? " " : "") << io::format_double(X(i, c));
        }
        out << '\n';
    }
}

TEST_F(CliTest, PairsCorpus) {
    const fs::path corpus = dir_ / "corpus";
    fs::create_directories(corpus);
    const Matrix forward = sine_pair(60, 6);
    Matrix backward(60, 2);
    backward << forward.col(1), forward.col(0);
    write_pair(corpus, "0001", forward);
    write_pair(corpus, "0002", backward);
    write_pair(corpus, "0003", Matrix::Ones(5, 3));
    std::ofstream(corpus / "pairmeta.txt") << "0001 1 1 2 2 1\n"
                                              "0002 2 2 1 1 0.5\n"
                                              "0003 1 2 3 3 1\n";
    const int code = run(with({"pairs", "--corpus", corpus.string(), "--out",
                               (dir_ / "rep").string()},
                              {"--max-iter", "400", "--T", "4"}));
    ASSERT_EQ(code, 0) << err_.str();
    const auto j = cli::json::parse(out_.str());
    EXPECT_EQ(j["accuracy"], 1.0);
    EXPECT_EQ(j["weighted_accuracy"], 1.0);
    EXPECT_EQ(j["evaluated"], 2);
    EXPECT_EQ(j["skipped"], cli::json::array({"0003"}));
    EXPECT_EQ(j["pairs"][0]["decision"], "a->b");
    EXPECT_EQ(j["pairs"][1]["decision"], "b->a");
    EXPECT_NE(err_.str().find("0003"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "rep" / "report.json"));
    EXPECT_TRUE(fs::exists(dir_ / "rep" / "manifest.json"));
}

TEST_F(CliTest, PairsErrors) {
    const fs::path corpus = dir_ / "empty";
    fs::create_directories(corpus);
    EXPECT_EQ(run({"pairs", "--corpus", corpus.string()}), cli::kDataError);
    std::ofstream(corpus / "pairmeta.txt") << "";
    EXPECT_EQ(run({"pairs", "--corpus", corpus.string()}), cli::kDataError);
    std::ofstream(corpus / "pairmeta.txt") << "0001 1 1\n";
    EXPECT_EQ(run({"pairs", "--corpus", corpus.string()}), cli::kDataError);
}

TEST_F(CliTest, ToyplotGrid) {
    const Matrix X = quadratic_pair(30, 7);
    const auto data = write_matrix("toy.csv", X);
    DiscoveryResult zero;
    zero.theta = ModelParams::zeros(30, 2);
    zero.gamma = 0.8;
    zero.column_mean = Vector::Zero(2);
    zero.column_scale = Vector::Ones(2);
    std::ofstream(dir_ / "zero.json") << cli::model_to_json(zero).dump();
    ASSERT_EQ(run({"toyplot", "--data", data.string(), "--model", (dir_ / "zero.json").string(),
                   "--out", (dir_ / "plot.csv").string()}),
              0)
        << err_.str();
    const auto t = io::read_table(dir_ / "plot.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"x", "f_hat"}));
    ASSERT_EQ(t.values.rows(), 200);
    EXPECT_EQ(t.values(0, 0), X.col(0).minCoeff());
    EXPECT_EQ(t.values(199, 0), X.col(0).maxCoeff());
    EXPECT_EQ(t.values.col(1).cwiseAbs().maxCoeff(), 0.0);

    const auto short_data = write_matrix("short.csv", quadratic_pair(20, 7));
    EXPECT_EQ(run({"toyplot", "--data", short_data.string(), "--model",
                   (dir_ / "zero.json").string(), "--out", (dir_ / "p2.csv").string()}),
              cli::kUsage);
}

TEST_F(CliTest, ToyplotMatchesPointEvaluation) {
    const Matrix X = quadratic_pair(25, 8);
    const auto data = write_matrix("toy.csv", X);
    DagmaConfig cfg;
    cfg.adam.max_iterations = 100;
    cfg.T = 1;
    const DiscoveryResult r = discover(X, cfg);
    std::ofstream(dir_ / "m.json") << cli::model_to_json(r).dump();
    cli::ToyplotOptions opt;
    opt.data = data;
    opt.model = dir_ / "m.json";
    const Matrix plot = cli::cmd_toyplot(opt);
    for (Index g = 0; g < plot.rows(); g += 37) {
        Vector x(2);
        x << plot(g, 0), 0.0;
        EXPECT_NEAR(plot(g, 1), eval_node_at(r.theta.nodes[1], X, x, KernelConfig{r.gamma}, 1),
                    1e-12 * std::max(1.0, std::abs(plot(g, 1))));
    }
}

}  // namespace
}  // namespace rkhs_dagma
