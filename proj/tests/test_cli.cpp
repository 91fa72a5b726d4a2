#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef PALM_CLI_PATH
#error "PALM_CLI_PATH must point at the built command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

fs::path scratch_root() {
    static const fs::path root = [] {
        const fs::path p = fs::temp_directory_path() / "palm_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

CliResult run_cli(const std::string& args) {
    static int invocation = 0;
    const fs::path dir = scratch_root() / ("io_" + std::to_string(invocation++));
    fs::create_directories(dir);
    const std::string cmd = std::string(PALM_CLI_PATH) + " " + args + " > " +
                            (dir / "out.txt").string() + " 2> " + (dir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    CliResult res;
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(dir / "out.txt");
    res.err = slurp(dir / "err.txt");
    return res;
}

// datasets shared across the test cases, generated once through the CLI
fs::path lasso_ds() {
    static const fs::path dir = [] {
        const fs::path p = scratch_root() / "ds_lasso";
        const CliResult r = run_cli("gen --problem lasso --m 4 --n 6 --count 12 --seed 3 --out " +
                                    p.string());
        REQUIRE(r.code == 0);
        return p;
    }();
    return dir;
}

fs::path ot_ds() {
    static const fs::path dir = [] {
        const fs::path p = scratch_root() / "ds_ot";
        const CliResult r =
            run_cli("gen --problem ot --m 3 --n 3 --count 6 --seed 9 --out " + p.string());
        REQUIRE(r.code == 0);
        return p;
    }();
    return dir;
}

// curves.csv -> method -> nmse values indexed by k-1
std::map<std::string, std::vector<double>> parse_curves(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "k,method,nmse_db");
    std::map<std::string, std::vector<double>> out;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        REQUIRE(c2 != std::string::npos);
        const int k = std::stoi(line.substr(0, c1));
        const std::string method = line.substr(c1 + 1, c2 - c1 - 1);
        const double v = std::stod(line.substr(c2 + 1));
        auto& vals = out[method];
        REQUIRE(k == static_cast<int>(vals.size()) + 1); // k counts up per method
        vals.push_back(v);
    }
    return out;
}

} // namespace

TEST_CASE("gen: summary, rerun determinism, bad dims", "[cli]") {
    const fs::path a = scratch_root() / "gen_a";
    const fs::path b = scratch_root() / "gen_b";
    const std::string flags = "gen --problem lasso --m 4 --n 6 --count 12 --seed 3 --out ";
    const CliResult ra = run_cli(flags + a.string());
    const CliResult rb = run_cli(flags + b.string());
    REQUIRE(ra.code == 0);
    REQUIRE(ra.out.find("kind=lasso") != std::string::npos);
    REQUIRE(ra.out.find("mu=0.1") != std::string::npos);
    REQUIRE(ra.out.find("train=11 test=1") != std::string::npos);
    REQUIRE(ra.out == rb.out);
    for (const char* f : {"manifest.json", "shared.csv", "instances.csv", "solutions.csv"}) {
        REQUIRE(fs::exists(a / f));
        REQUIRE(slurp(a / f) == slurp(b / f));
    }

    const CliResult bad = run_cli("gen --problem lasso --m 0 --n 5 --out " +
                                  (scratch_root() / "gen_bad").string());
    REQUIRE(bad.code == 2);
}

TEST_CASE("gen: ot marginals ingested from csv", "[cli]") {
    const fs::path file = scratch_root() / "pairs.csv";
    std::ofstream(file) << "1,2,1\n1,1\n3,1,1\n2,3\n";
    const CliResult r = run_cli("gen --problem ot --m 3 --n 2 --marginals " + file.string() +
                                " --out " + (scratch_root() / "ds_csv").string());
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("kind=ot") != std::string::npos);
    REQUIRE(r.out.find("count=2") != std::string::npos);
}

TEST_CASE("config file supplies values, flags override", "[cli]") {
    const fs::path cfg = scratch_root() / "cfg.json";
    std::ofstream(cfg) << R"({"m": 5, "count": 8, "mu": 0.2})";
    const CliResult r = run_cli("gen --config " + cfg.string() + " --n 7 --seed 2 --out " +
                                (scratch_root() / "ds_cfg").string());
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("m=5 n=7 count=8 mu=0.2") != std::string::npos);

    const fs::path bad = scratch_root() / "bad_cfg.json";
    std::ofstream(bad) << R"({"typo_key": 1})";
    REQUIRE(run_cli("gen --config " + bad.string()).code == 2);
    std::ofstream(bad) << "{not json";
    REQUIRE(run_cli("gen --config " + bad.string()).code == 2);
}

TEST_CASE("train: schedule and report files, determinism", "[cli]") {
    const fs::path out0 = scratch_root() / "train_zero";
    const CliResult r0 = run_cli("train --data " + lasso_ds().string() +
                                 " --K 16 --K0 4 --epochs 0 --batch-size 8 --out " + out0.string());
    REQUIRE(r0.code == 0);
    const auto sched0 = nlohmann::json::parse(slurp(out0 / "schedule.json"));
    REQUIRE(sched0.at("K").get<int>() == 16);
    REQUIRE(sched0.at("k0").get<int>() == 4);
    REQUIRE(sched0.at("tau").get<double>() == 1.618);
    REQUIRE(sched0.at("sigmas").get<std::vector<double>>() == std::vector<double>{1, 1, 1, 1});
    REQUIRE(slurp(out0 / "train_report.csv") == "epoch,train_loss,test_nmse\n");

    const std::string train_flags = "train --data " + lasso_ds().string() +
                                    " --K 16 --K0 4 --epochs 3 --batch-size 8 --lr 0.05 --seed 5 --out ";
    const fs::path out1 = scratch_root() / "train_a";
    const fs::path out2 = scratch_root() / "train_b";
    REQUIRE(run_cli(train_flags + out1.string()).code == 0);
    REQUIRE(run_cli(train_flags + out2.string()).code == 0);
    REQUIRE(slurp(out1 / "schedule.json") == slurp(out2 / "schedule.json"));
    REQUIRE(slurp(out1 / "train_report.csv") == slurp(out2 / "train_report.csv"));

    // three epoch rows whose running minimum never rises
    std::ifstream rep(out1 / "train_report.csv");
    std::string line;
    std::getline(rep, line);
    REQUIRE(line == "epoch,train_loss,test_nmse");
    int rows = 0;
    double running_min = std::numeric_limits<double>::infinity();
    while (std::getline(rep, line)) {
        ++rows;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        REQUIRE(std::stoi(line.substr(0, c1)) == rows);
        const double loss = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        REQUIRE(loss >= 0.0);
        running_min = std::min(running_min, loss);
        REQUIRE(running_min <= loss);
    }
    REQUIRE(rows == 3);

    const auto sched1 = nlohmann::json::parse(slurp(out1 / "schedule.json"));
    const auto sigmas = sched1.at("sigmas").get<std::vector<double>>();
    REQUIRE(sigmas.size() == 4);
    for (double s : sigmas) REQUIRE(s > 0.0);
}

TEST_CASE("train: error exit classes", "[cli]") {
    REQUIRE(run_cli("train --data " + (scratch_root() / "no_such_dir").string() +
                    " --K 8 --K0 2")
                .code == 4);
    REQUIRE(run_cli("train --data " + lasso_ds().string() + " --K 4 --K0 9").code == 2);
    // default batch size exceeds the 11-instance train split
    REQUIRE(run_cli("train --data " + lasso_ds().string() + " --K 8 --K0 2 --epochs 1").code == 2);
    REQUIRE(run_cli("train --data " + lasso_ds().string() + " --K 8 --K0 2 --tau 2.5").code == 2);
}

TEST_CASE("eval: oracle floor, method set, descent, determinism", "[cli]") {
    const fs::path tr = scratch_root() / "eval_sched";
    REQUIRE(run_cli("train --data " + lasso_ds().string() +
                    " --K 16 --K0 4 --epochs 3 --batch-size 8 --lr 0.05 --seed 5 --out " +
                    tr.string())
                .code == 0);
    const std::string eval_flags = "eval --data " + lasso_ds().string() +
                                   " --K 16 --K0 4 --schedule " + (tr / "schedule.json").string() +
                                   " --sigma 1 --baseline fixed --baseline ista --out ";
    const fs::path out1 = scratch_root() / "eval_a";
    const fs::path out2 = scratch_root() / "eval_b";
    REQUIRE(run_cli(eval_flags + out1.string()).code == 0);
    REQUIRE(run_cli(eval_flags + out2.string()).code == 0);
    REQUIRE(slurp(out1 / "curves.csv") == slurp(out2 / "curves.csv"));

    const auto curves = parse_curves(out1 / "curves.csv");
    REQUIRE(curves.size() == 4);
    REQUIRE(curves.count("oracle") == 1);
    REQUIRE(curves.count("learned") == 1);
    REQUIRE(curves.count("sigma=1") == 1);
    REQUIRE(curves.count("ista") == 1);
    for (const auto& [method, vals] : curves) {
        REQUIRE(vals.size() == 16);
        for (double v : vals) {
            REQUIRE(std::isfinite(v));
            REQUIRE(v >= -160.0);
        }
    }
    for (double v : curves.at("oracle")) REQUIRE(v == -160.0);
    // solvers make progress over the run
    REQUIRE(curves.at("learned").back() < curves.at("learned").front());
    REQUIRE(curves.at("sigma=1").back() < curves.at("sigma=1").front());
    REQUIRE(curves.at("ista").back() < curves.at("ista").front());
}

TEST_CASE("eval: entropic curves plateau on their own counter, ordered by regularization",
          "[cli]") {
    const fs::path out = scratch_root() / "eval_ot";
    REQUIRE(run_cli("eval --data " + ot_ds().string() +
                    " --K 20 --K0 5 --constant-sigma 1 --baseline sinkhorn --lambda 0.4 "
                    "--lambda 0.04 --sinkhorn-iters 1500 --out " +
                    out.string())
                .code == 0);
    const auto curves = parse_curves(out / "curves.csv");
    REQUIRE(curves.at("sigma=1").size() == 20);
    const auto& loose = curves.at("sinkhorn_lambda=0.4");
    const auto& tight = curves.at("sinkhorn_lambda=0.04");
    REQUIRE(loose.size() == 1500);
    REQUIRE(tight.size() == 1500);
    for (const auto* c : {&loose, &tight}) {
        double lo = c->back(), hi = c->back();
        for (std::size_t i = c->size() - 10; i < c->size(); ++i) {
            lo = std::min(lo, (*c)[i]);
            hi = std::max(hi, (*c)[i]);
        }
        REQUIRE(hi - lo <= 1e-9); // plateaued
    }
    REQUIRE(tight.back() < loose.back() - 10.0); // smaller regularization, lower floor
}

TEST_CASE("eval: error exit classes", "[cli]") {
    REQUIRE(run_cli("eval --data " + ot_ds().string() + " --K 8 --K0 2 --baseline ista").code == 2);
    REQUIRE(run_cli("eval --data " + lasso_ds().string() + " --K 8 --K0 2 --baseline bogus").code ==
            2);
    const fs::path bad_sched = scratch_root() / "bad_schedule.json";
    std::ofstream(bad_sched) << "{oops";
    REQUIRE(run_cli("eval --data " + lasso_ds().string() + " --K 8 --K0 2 --schedule " +
                    bad_sched.string())
                .code == 4);
    REQUIRE(run_cli("eval --data " + lasso_ds().string() + " --K 8 --K0 2 --schedule " +
                    (scratch_root() / "no_schedule.json").string())
                .code == 4);
    REQUIRE(run_cli("eval --K 8 --K0 2").code == 2); // --data missing entirely
}

TEST_CASE("oracle-check: recertification passes and corruption is caught", "[cli]") {
    const CliResult ok = run_cli("oracle-check --data " + lasso_ds().string());
    REQUIRE(ok.code == 0);
    REQUIRE(ok.out.find("status=ok") != std::string::npos);

    // copy the dataset, truncate a payload, expect the io exit class
    const fs::path broken = scratch_root() / "ds_broken";
    fs::remove_all(broken);
    fs::copy(lasso_ds(), broken);
    const std::string bytes = slurp(broken / "solutions.csv");
    std::ofstream(broken / "solutions.csv", std::ios::binary | std::ios::trunc)
        << bytes.substr(0, bytes.size() - 4);
    const CliResult bad = run_cli("oracle-check --data " + broken.string());
    REQUIRE(bad.code == 4);
    REQUIRE(bad.out.find("status=ok") == std::string::npos);
}

TEST_CASE("unknown flags and help exits", "[cli]") {
    REQUIRE(run_cli("eval --data x --K 8 --K0 2 --bogus-flag").code == 2);
    REQUIRE(run_cli("--help").code == 0);
    REQUIRE(run_cli("gen --help").code == 0);
    REQUIRE(run_cli("").code == 2); // a subcommand is required
}
