// Command-line harness: dataset generation, penalty-schedule training,
// NMSE-vs-iteration evaluation with baselines, and stored-oracle checking.
// Outputs are machine-readable (JSON/CSV) and byte-deterministic per seed.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "palm/datasets.hpp"
#include "palm/erm.hpp"
#include "palm/errors.hpp"
#include "palm/lasso.hpp"
#include "palm/learn.hpp"
#include "palm/mpalm.hpp"
#include "palm/ot.hpp"
#include "palm/parallel.hpp"

namespace {

using nlohmann::json;

constexpr int exit_generic = 1;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

// output-side I/O failure; mapped to the io exit class alongside load errors
class write_error : public std::runtime_error {
public:
    explicit write_error(const std::string& what) : std::runtime_error(what) {}
};

struct Options {
    std::string problem = "lasso"; // lasso | ot (gen only; other commands trust the dataset)
    int m = 10;
    int n = 20;
    int count = 0; // 0 = per-problem desk-scale default (500 lasso, 100 ot)
    double mu = 0.1;
    std::string marginals; // optional ot marginal CSV source for gen
    int K = 64;
    int K0 = 8;
    double tau = 1.618;
    std::uint64_t seed = 0;
    std::string data;
    std::string out = ".";
    std::string schedule_path;
    double constant_sigma = 0.0; // > 0 selects a constant-penalty schedule
    bool grid = false;           // grid-search the penalty on the train split
    std::vector<double> sigmas;  // fixed-penalty baseline / grid candidates
    std::vector<double> lambdas; // entropic regularization list (absolute values)
    std::vector<std::string> baselines;
    int epochs = 0;
    double lr = 0.001;
    int batch_size = 50;
    double fd_step = 1e-4;
    double weight_decay = 0.0;
    double beta1 = 0.999;
    double beta2 = 0.999;
    int sinkhorn_iters = 1000;
};

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw write_error("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw write_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw palm::load_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

// --------------------------------------------------------------------------
// config file: JSON with the same vocabulary as the flags; flags override

void apply_config(Options& o, const json& j) {
    static const std::set<std::string> known = {
        "problem",   "m",      "n",           "count",      "mu",          "marginals",
        "K",         "K0",     "tau",         "seed",       "data",        "out",
        "schedule",  "constant_sigma",        "grid",       "sigmas",      "lambdas",
        "baselines", "epochs", "lr",          "batch_size", "fd_step",     "weight_decay",
        "beta1",     "beta2",  "sinkhorn_iters"};
    for (const auto& item : j.items())
        if (known.find(item.key()) == known.end())
            throw std::invalid_argument("config: unknown key '" + item.key() + "'");
    if (j.contains("problem")) o.problem = j.at("problem").get<std::string>();
    if (j.contains("m")) o.m = j.at("m").get<int>();
    if (j.contains("n")) o.n = j.at("n").get<int>();
    if (j.contains("count")) o.count = j.at("count").get<int>();
    if (j.contains("mu")) o.mu = j.at("mu").get<double>();
    if (j.contains("marginals")) o.marginals = j.at("marginals").get<std::string>();
    if (j.contains("K")) o.K = j.at("K").get<int>();
    if (j.contains("K0")) o.K0 = j.at("K0").get<int>();
    if (j.contains("tau")) o.tau = j.at("tau").get<double>();
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("data")) o.data = j.at("data").get<std::string>();
    if (j.contains("out")) o.out = j.at("out").get<std::string>();
    if (j.contains("schedule")) o.schedule_path = j.at("schedule").get<std::string>();
    if (j.contains("constant_sigma")) o.constant_sigma = j.at("constant_sigma").get<double>();
    if (j.contains("grid")) o.grid = j.at("grid").get<bool>();
    if (j.contains("sigmas")) o.sigmas = j.at("sigmas").get<std::vector<double>>();
    if (j.contains("lambdas")) o.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("baselines")) o.baselines = j.at("baselines").get<std::vector<std::string>>();
    if (j.contains("epochs")) o.epochs = j.at("epochs").get<int>();
    if (j.contains("lr")) o.lr = j.at("lr").get<double>();
    if (j.contains("batch_size")) o.batch_size = j.at("batch_size").get<int>();
    if (j.contains("fd_step")) o.fd_step = j.at("fd_step").get<double>();
    if (j.contains("weight_decay")) o.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("beta1")) o.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) o.beta2 = j.at("beta2").get<double>();
    if (j.contains("sinkhorn_iters")) o.sinkhorn_iters = j.at("sinkhorn_iters").get<int>();
}

// the config file must land before CLI11 assigns flag values, so --config is
// located by a pre-scan of argv
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

// --------------------------------------------------------------------------
// shared pieces

void require_shape(const Options& o) {
    if (o.K < 1) throw std::invalid_argument("K must be at least 1");
    if (o.K0 < 1 || o.K0 > o.K) throw std::invalid_argument("K0 must satisfy 1 <= K0 <= K");
    if (!(o.tau > 0.0) || !(o.tau < 2.0)) throw std::invalid_argument("tau must lie in (0,2)");
}

palm::Dataset open_dataset(const Options& o) {
    if (o.data.empty()) throw std::invalid_argument("--data is required for this command");
    return palm::load_dataset(o.data);
}

std::vector<double> default_sigma_grid() { return {1e-2, 1e-1, 1.0, 1e1, 1e2}; }

struct SplitView {
    std::vector<int> indices;
    std::vector<palm::Vector> truth;
};

SplitView view_of(const palm::Dataset& ds, const std::vector<int>& indices) {
    SplitView v;
    v.indices = indices;
    for (int i : indices) v.truth.push_back(ds.solutions[static_cast<std::size_t>(i)]);
    return v;
}

palm::TrainSet trainset_of(const palm::Dataset& ds, const std::vector<int>& indices) {
    std::vector<palm::Vector> sols;
    for (int i : indices) sols.push_back(ds.solutions[static_cast<std::size_t>(i)]);
    if (ds.kind == palm::DatasetKind::lasso) {
        std::vector<palm::LassoInstance> insts;
        for (int i : indices) insts.push_back(palm::lasso_instance_at(ds, i));
        return palm::make_lasso_trainset(insts, sols);
    }
    std::vector<palm::OtInstance> insts;
    for (int i : indices) insts.push_back(palm::ot_instance_at(ds, i));
    return palm::make_ot_trainset(insts, sols);
}

std::string schedule_json(const palm::PenaltySchedule& s) {
    json j;
    j["K"] = s.total_iters;
    j["k0"] = s.segment_length;
    j["sigmas"] = s.sigmas;
    j["tau"] = s.step_size;
    return j.dump(2) + "\n";
}

palm::PenaltySchedule load_schedule(const std::string& path) {
    palm::PenaltySchedule s;
    try {
        const json j = json::parse(read_text(path));
        s.sigmas = j.at("sigmas").get<std::vector<double>>();
        s.segment_length = j.at("k0").get<int>();
        s.total_iters = j.at("K").get<int>();
        s.step_size = j.at("tau").get<double>();
    } catch (const json::exception& e) {
        throw palm::load_error(path + ": " + e.what());
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw palm::load_error(path + ": " + e.what());
    }
    return s;
}

// --------------------------------------------------------------------------
// gen

int cmd_gen(const Options& o) {
    if (o.problem != "lasso" && o.problem != "ot")
        throw std::invalid_argument("problem must be 'lasso' or 'ot'");
    const bool lasso = o.problem == "lasso";
    const int count = o.count > 0 ? o.count : (lasso ? 500 : 100);

    // paper-scale requests are accepted; estimate the oracle bill first
    if (o.marginals.empty() && count > 2000) {
        const auto t0 = std::chrono::steady_clock::now();
        if (lasso)
            palm::build_lasso_dataset(o.m, o.n, 2, o.mu, o.seed);
        else
            palm::build_ot_dataset(o.m, o.n, 2, o.seed);
        const double per_oracle =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 2.0;
        std::fprintf(stderr, "note: %d oracle solves ahead, roughly %.0f s at current speed\n",
                     count, per_oracle * count);
    }

    palm::Dataset ds;
    if (lasso) {
        ds = palm::build_lasso_dataset(o.m, o.n, count, o.mu, o.seed);
    } else if (!o.marginals.empty()) {
        ds = palm::build_ot_dataset(o.m, o.n, o.marginals, o.seed);
    } else {
        ds = palm::build_ot_dataset(o.m, o.n, count, o.seed);
    }
    palm::save_dataset(ds, o.out);

    double max_cert = 0.0;
    for (double c : ds.certificates) max_cert = std::max(max_cert, c);
    std::cout << "kind=" << kind_name(ds.kind) << " m=" << ds.m() << " n=" << ds.n()
              << " count=" << ds.count();
    if (lasso) std::cout << " mu=" << fmt(ds.mu);
    std::cout << " train=" << ds.train_indices.size() << " test=" << ds.test_indices.size()
              << " max_certificate=" << fmt(max_cert) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// train

int cmd_train(const Options& o) {
    require_shape(o);
    const palm::Dataset ds = open_dataset(o);
    const palm::TrainSet train = trainset_of(ds, ds.train_indices);
    const palm::TrainSet test = trainset_of(ds, ds.test_indices);

    const palm::ScheduleShape shape{o.K, o.K0, o.tau};
    palm::TrainConfig cfg;
    cfg.lr = o.lr;
    cfg.beta1 = o.beta1;
    cfg.beta2 = o.beta2;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.restarts = (o.K + o.K0 - 1) / o.K0; // theta has one entry per segment
    cfg.fd_step = o.fd_step;
    cfg.weight_decay = o.weight_decay;
    cfg.seed = o.seed;

    const palm::TrainReport rep = palm::train(train, test, shape, cfg);

    std::filesystem::create_directories(o.out);
    write_text(std::filesystem::path(o.out) / "schedule.json", schedule_json(rep.final_schedule));
    std::string csv = "epoch,train_loss,test_nmse\n";
    for (std::size_t e = 0; e < rep.loss_history.size(); ++e)
        csv += std::to_string(e + 1) + "," + fmt(rep.loss_history[e]) + "," +
               fmt(rep.test_nmse_history[e]) + "\n";
    write_text(std::filesystem::path(o.out) / "train_report.csv", csv);

    std::cout << "epochs=" << rep.loss_history.size() << " segments=" << cfg.restarts;
    if (std::isfinite(rep.best_test_nmse)) std::cout << " best_test_nmse=" << fmt(rep.best_test_nmse);
    std::cout << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// eval

using Runner = std::function<std::vector<palm::Vector>(int)>; // instance -> iterates for k=1..L

// per-instance trajectories in parallel, then a fixed-order mean per k
std::vector<double> nmse_curve(int count, int L, const Runner& run,
                               const std::vector<palm::Vector>& truth) {
    palm::DenseMatrix db(count, L);
    palm::parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        const std::vector<palm::Vector> iters = run(static_cast<int>(i));
        if (static_cast<int>(iters.size()) != L)
            throw std::logic_error("evaluation produced a short trajectory");
        const double tn = palm::norm2(truth[i]);
        if (!(tn > 0.0)) throw palm::numerical_instability_error("zero-norm reference solution");
        for (int k = 0; k < L; ++k) {
            double sq = 0.0;
            for (std::size_t d = 0; d < iters[static_cast<std::size_t>(k)].size(); ++d) {
                const double diff = iters[static_cast<std::size_t>(k)][d] - truth[i][d];
                sq += diff * diff;
            }
            db(static_cast<int>(i), k) = 10.0 * std::log10(std::max(std::sqrt(sq) / tn, 1e-16));
        }
    });
    std::vector<double> out(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) {
        double acc = 0.0;
        for (int i = 0; i < count; ++i) acc += db(i, k);
        out[static_cast<std::size_t>(k)] = acc / static_cast<double>(count);
    }
    return out;
}

std::vector<std::string> resolved_baselines(const Options& o, palm::DatasetKind kind) {
    std::vector<std::string> names = o.baselines;
    if (names.empty())
        names = kind == palm::DatasetKind::lasso ? std::vector<std::string>{"fixed", "ista"}
                                                 : std::vector<std::string>{"fixed", "sinkhorn"};
    for (const std::string& b : names) {
        if (b != "fixed" && b != "ista" && b != "sinkhorn")
            throw std::invalid_argument("unknown baseline '" + b + "'");
        if (b == "ista" && kind != palm::DatasetKind::lasso)
            throw std::invalid_argument("ista baseline applies to lasso datasets only");
        if (b == "sinkhorn" && kind != palm::DatasetKind::ot)
            throw std::invalid_argument("sinkhorn baseline applies to ot datasets only");
    }
    return names;
}

int cmd_eval(const Options& o) {
    require_shape(o);
    if (o.sinkhorn_iters < 1) throw std::invalid_argument("sinkhorn_iters must be at least 1");
    const palm::Dataset ds = open_dataset(o);
    const SplitView test = view_of(ds, ds.test_indices);
    const int tc = static_cast<int>(test.indices.size());
    const std::vector<std::string> baselines = resolved_baselines(o, ds.kind);
    const auto has = [&](const char* b) {
        return std::find(baselines.begin(), baselines.end(), b) != baselines.end();
    };

    // named schedules to run through the solver, primary source first
    std::vector<std::pair<std::string, palm::PenaltySchedule>> scheds;
    if (!o.schedule_path.empty()) scheds.emplace_back("learned", load_schedule(o.schedule_path));
    if (o.grid) {
        const std::vector<double> grid = o.sigmas.empty() ? default_sigma_grid() : o.sigmas;
        const palm::TrainSet train = trainset_of(ds, ds.train_indices);
        const palm::GridSearchResult res =
            palm::grid_search(train, palm::ScheduleShape{o.K, o.K0, o.tau}, grid);
        scheds.emplace_back("grid_sigma=" + fmt(res.sigma), res.schedule);
    }
    if (o.constant_sigma != 0.0) {
        if (!(o.constant_sigma > 0.0))
            throw std::invalid_argument("constant_sigma must be positive");
        scheds.emplace_back("sigma=" + fmt(o.constant_sigma),
                            palm::constant_schedule(o.constant_sigma, o.K, o.K0, o.tau));
    }
    if (has("fixed")) {
        const std::vector<double> fixed = o.sigmas.empty() ? default_sigma_grid() : o.sigmas;
        for (double s : fixed) {
            if (!(s > 0.0)) throw std::invalid_argument("penalty values must be positive");
            scheds.emplace_back("sigma=" + fmt(s), palm::constant_schedule(s, o.K, o.K0, o.tau));
        }
    }

    std::vector<std::pair<std::string, std::vector<double>>> curves;
    curves.emplace_back("oracle", std::vector<double>(static_cast<std::size_t>(o.K), -160.0));

    std::set<std::string> seen{"oracle"};
    const palm::SpectralCache cache = ds.kind == palm::DatasetKind::lasso
                                          ? palm::build_spectral_cache(ds.shared)
                                          : palm::SpectralCache{};
    for (const auto& [name, sched] : scheds) {
        if (!seen.insert(name).second) continue;
        const int L = sched.total_iters;
        const Runner run = [&](int i) {
            std::vector<palm::Vector> iters;
            if (ds.kind == palm::DatasetKind::lasso) {
                const palm::LassoInstance inst = palm::lasso_instance_at(ds, test.indices[static_cast<std::size_t>(i)]);
                iters = palm::lasso_mpalm_run(inst, cache, sched, palm::zero_lasso_state(inst), false).x_iters;
            } else {
                const palm::OtInstance inst = palm::ot_instance_at(ds, test.indices[static_cast<std::size_t>(i)]);
                iters = palm::ot_mpalm_run(inst, sched, palm::zero_ot_state(inst), false).x_iters;
            }
            iters.erase(iters.begin()); // drop the k=0 initialization
            return iters;
        };
        curves.emplace_back(name, nmse_curve(tc, L, run, test.truth));
    }

    if (has("ista")) {
        const Runner run = [&](int i) {
            const palm::LassoInstance inst = palm::lasso_instance_at(ds, test.indices[static_cast<std::size_t>(i)]);
            std::vector<palm::Vector> iters =
                palm::ista_run(inst, cache, o.K, palm::Vector(static_cast<std::size_t>(ds.n()), 0.0));
            iters.erase(iters.begin());
            return iters;
        };
        curves.emplace_back("ista", nmse_curve(tc, o.K, run, test.truth));
    }

    if (has("sinkhorn")) {
        std::vector<double> lambdas = o.lambdas;
        if (lambdas.empty()) lambdas = palm::default_lambda_grid(ds.shared);
        for (double lambda : lambdas) {
            const std::string name = "sinkhorn_lambda=" + fmt(lambda);
            if (!seen.insert(name).second) continue;
            const Runner run = [&, lambda](int i) {
                const palm::OtInstance inst = palm::ot_instance_at(ds, test.indices[static_cast<std::size_t>(i)]);
                std::vector<palm::Vector> plans;
                plans.reserve(static_cast<std::size_t>(o.sinkhorn_iters));
                palm::sinkhorn(inst, lambda, o.sinkhorn_iters, 0.0,
                               [&](int, const palm::DenseMatrix& plan) {
                                   plans.push_back(plan.entries);
                               });
                while (static_cast<int>(plans.size()) < o.sinkhorn_iters)
                    plans.push_back(plans.back()); // converged exactly before the budget
                return plans;
            };
            curves.emplace_back(name, nmse_curve(tc, o.sinkhorn_iters, run, test.truth));
        }
    }

    std::string csv = "k,method,nmse_db\n";
    for (const auto& [name, vals] : curves)
        for (std::size_t k = 0; k < vals.size(); ++k)
            csv += std::to_string(k + 1) + "," + name + "," + fmt(vals[k]) + "\n";
    std::filesystem::create_directories(o.out);
    write_text(std::filesystem::path(o.out) / "curves.csv", csv);
    std::cout << "methods=" << curves.size() << " test_instances=" << tc << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// oracle-check

int cmd_oracle_check(const Options& o) {
    const palm::Dataset ds = open_dataset(o); // load re-runs every certificate
    double max_cert = 0.0;
    for (double c : ds.certificates) max_cert = std::max(max_cert, c);
    std::cout << "kind=" << kind_name(ds.kind) << " count=" << ds.count()
              << " max_certificate=" << fmt(max_cert) << " status=ok\n";
    return 0;
}

// --------------------------------------------------------------------------

template <typename Fn>
int dispatch(Fn fn) {
    try {
        return fn();
    } catch (const palm::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const palm::load_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const write_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const palm::dataset_build_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::no_convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::numerical_instability_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::nonfinite_gradient_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::singular_matrix_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::assumption_violation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const palm::infeasible_certificate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_generic;
    }
}

void add_common(CLI::App* cmd, Options& o, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output directory");
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        const int rc = dispatch([&] {
            json parsed;
            try {
                parsed = json::parse(read_text(config_path));
            } catch (const json::exception& e) {
                throw std::invalid_argument("config " + config_path + ": " + e.what());
            } catch (const palm::load_error& e) {
                throw std::invalid_argument(std::string("config: ") + e.what());
            }
            apply_config(opt, parsed);
            return 0;
        });
        if (rc != 0) return rc;
    }

    CLI::App app{"penalty-schedule solver toolkit"};
    app.require_subcommand(1);
    std::string config_echo; // accepted here, consumed by the pre-scan above

    CLI::App* gen = app.add_subcommand("gen", "generate a certified dataset");
    add_common(gen, opt, config_echo);
    gen->add_option("--problem", opt.problem, "lasso or ot");
    gen->add_option("--m", opt.m, "instance rows");
    gen->add_option("--n", opt.n, "instance columns");
    gen->add_option("--count", opt.count, "instance count (0 = desk-scale default)");
    gen->add_option("--mu", opt.mu, "lasso regularization weight");
    gen->add_option("--marginals", opt.marginals, "ot marginal CSV (alpha/beta row pairs)");

    CLI::App* train = app.add_subcommand("train", "fit a penalty schedule by ERM");
    add_common(train, opt, config_echo);
    train->add_option("--data", opt.data, "dataset directory");
    train->add_option("--K", opt.K, "solver iterations");
    train->add_option("--K0", opt.K0, "iterations per schedule segment");
    train->add_option("--tau", opt.tau, "multiplier step size");
    train->add_option("--epochs", opt.epochs, "training epochs (0 writes the all-ones schedule)");
    train->add_option("--lr", opt.lr, "optimizer learning rate");
    train->add_option("--batch-size", opt.batch_size, "minibatch size");
    train->add_option("--fd-step", opt.fd_step, "finite-difference step");
    train->add_option("--weight-decay", opt.weight_decay, "decoupled weight decay");

    CLI::App* eval = app.add_subcommand("eval", "write NMSE-vs-iteration curves");
    add_common(eval, opt, config_echo);
    eval->add_option("--data", opt.data, "dataset directory");
    eval->add_option("--K", opt.K, "solver iterations");
    eval->add_option("--K0", opt.K0, "iterations per schedule segment");
    eval->add_option("--tau", opt.tau, "multiplier step size");
    eval->add_option("--schedule", opt.schedule_path, "trained schedule.json to evaluate");
    eval->add_option("--constant-sigma", opt.constant_sigma, "evaluate one constant penalty");
    eval->add_flag("--grid", opt.grid, "grid-search the penalty on the train split");
    eval->add_option("--sigma", opt.sigmas, "fixed-penalty baseline value (repeatable)");
    eval->add_option("--lambda", opt.lambdas, "entropic regularization value (repeatable)");
    eval->add_option("--baseline", opt.baselines, "baseline set: fixed, ista, sinkhorn (repeatable)");
    eval->add_option("--sinkhorn-iters", opt.sinkhorn_iters, "matrix-scaling iteration budget");

    CLI::App* check = app.add_subcommand("oracle-check", "recertify a stored dataset");
    add_common(check, opt, config_echo);
    check->add_option("--data", opt.data, "dataset directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    if (gen->parsed()) return dispatch([&] { return cmd_gen(opt); });
    if (train->parsed()) return dispatch([&] { return cmd_train(opt); });
    if (eval->parsed()) return dispatch([&] { return cmd_eval(opt); });
    if (check->parsed()) return dispatch([&] { return cmd_oracle_check(opt); });
    return exit_generic;
}
