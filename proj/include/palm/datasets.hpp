#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "lasso.hpp"
#include "linalg.hpp"
#include "ot.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace palm {

// ---------------------------------------------------------------------------
// dataset type

enum class DatasetKind { lasso, ot };

inline std::string kind_name(DatasetKind kind) {
    return kind == DatasetKind::lasso ? "lasso" : "ot";
}

inline DatasetKind kind_from_name(const std::string& name) {
    if (name == "lasso") return DatasetKind::lasso;
    if (name == "ot") return DatasetKind::ot;
    throw load_error("unknown dataset kind '" + name + "'");
}

/// A problem family (shared matrix), its per-instance payloads, certified
/// oracle solutions, and a train/test split. Payload layout by kind:
///   lasso: shared = m x n dictionary, instance = signal in R^m,
///          solution = primal point in R^n, certificate = duality gap
///   ot:    shared = m x n cost, instance = marginals (alpha | beta) in R^{m+n},
///          solution = plan flattened row-major in R^{m*n},
///          certificate = optimality residual of the exact solver
struct Dataset {
    DatasetKind kind = DatasetKind::lasso;
    DenseMatrix shared;
    double mu = 0.0; // lasso regularization weight; zero for ot
    std::vector<Vector> instances;
    std::vector<Vector> solutions;
    std::vector<double> certificates;
    std::vector<int> train_indices;
    std::vector<int> test_indices;
    std::uint64_t seed = 0;

    int m() const { return shared.rows; }
    int n() const { return shared.cols; }
    int count() const { return static_cast<int>(instances.size()); }

    // structural invariants only; solution quality is checked by verify_solutions
    void validate() const {
        if (shared.rows < 1 || shared.cols < 1)
            throw std::invalid_argument("dataset: empty shared matrix");
        if (kind == DatasetKind::lasso && !(mu > 0.0))
            throw std::invalid_argument("dataset: lasso requires positive mu");
        if (instances.size() != solutions.size() || instances.size() != certificates.size())
            throw std::invalid_argument("dataset: instances, solutions, certificates must align");
        const std::size_t inst_len = kind == DatasetKind::lasso
                                         ? static_cast<std::size_t>(shared.rows)
                                         : static_cast<std::size_t>(shared.rows + shared.cols);
        const std::size_t sol_len = kind == DatasetKind::lasso
                                        ? static_cast<std::size_t>(shared.cols)
                                        : static_cast<std::size_t>(shared.rows) * shared.cols;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (instances[i].size() != inst_len)
                throw std::invalid_argument("dataset: instance " + std::to_string(i) +
                                            " has wrong payload size");
            if (solutions[i].size() != sol_len)
                throw std::invalid_argument("dataset: solution " + std::to_string(i) +
                                            " has wrong size");
            if (!(certificates[i] <= 1e-8))
                throw std::invalid_argument("dataset: certificate " + std::to_string(i) +
                                            " exceeds 1e-8");
        }
        // split must partition [0, count)
        std::vector<int> all;
        all.reserve(train_indices.size() + test_indices.size());
        all.insert(all.end(), train_indices.begin(), train_indices.end());
        all.insert(all.end(), test_indices.begin(), test_indices.end());
        if (all.size() != instances.size())
            throw std::invalid_argument("dataset: split does not cover all instances");
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < all.size(); ++i)
            if (all[i] != static_cast<int>(i))
                throw std::invalid_argument("dataset: split indices not a partition");
    }
};

/// Materialize instance i as a solver-ready problem.
inline LassoInstance lasso_instance_at(const Dataset& ds, int i) {
    if (ds.kind != DatasetKind::lasso)
        throw std::invalid_argument("lasso_instance_at: dataset kind is not lasso");
    if (i < 0 || i >= ds.count()) throw std::invalid_argument("lasso_instance_at: index out of range");
    return {ds.shared, ds.instances[static_cast<std::size_t>(i)], ds.mu};
}

inline OtInstance ot_instance_at(const Dataset& ds, int i) {
    if (ds.kind != DatasetKind::ot)
        throw std::invalid_argument("ot_instance_at: dataset kind is not ot");
    if (i < 0 || i >= ds.count()) throw std::invalid_argument("ot_instance_at: index out of range");
    const Vector& payload = ds.instances[static_cast<std::size_t>(i)];
    const auto m = static_cast<std::size_t>(ds.m());
    Vector alpha(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(m));
    Vector beta(payload.begin() + static_cast<std::ptrdiff_t>(m), payload.end());
    return {ds.shared, std::move(alpha), std::move(beta)};
}

// ---------------------------------------------------------------------------
// builders

namespace detail {

// distinct streams derived from the dataset seed
inline constexpr std::uint64_t payload_stream = 1;
inline constexpr std::uint64_t split_stream = 2;

inline void seeded_split(Dataset& ds, std::uint64_t seed) {
    const int count = ds.count();
    const int test = std::max(1, count / 10);
    std::vector<int> order(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng = Rng::derive(seed, split_stream);
    shuffle(order, rng);
    ds.test_indices.assign(order.begin(), order.begin() + test);
    ds.train_indices.assign(order.begin() + test, order.end());
    std::sort(ds.test_indices.begin(), ds.test_indices.end());
    std::sort(ds.train_indices.begin(), ds.train_indices.end());
}

template <typename SolveFn>
void attach_solutions(Dataset& ds, SolveFn solve) {
    const auto count = ds.instances.size();
    ds.solutions.assign(count, Vector{});
    ds.certificates.assign(count, 0.0);
    parallel_for(count, [&](std::size_t i) {
        try {
            solve(i);
        } catch (const dataset_build_error&) {
            throw;
        } catch (const std::exception& e) {
            throw dataset_build_error("instance " + std::to_string(i) + ": " + e.what());
        }
    });
}

} // namespace detail

/// One shared dictionary, Gaussian signals, coordinate-descent solutions
/// certified to duality gap 1e-10. Split is 90/10 by seeded shuffle.
inline Dataset build_lasso_dataset(int m, int n, int count, double mu = 0.1,
                                   std::uint64_t seed = 0) {
    if (count < 2) throw std::invalid_argument("build_lasso_dataset: count >= 2 required");
    if (!(mu > 0.0)) throw std::invalid_argument("build_lasso_dataset: mu must be positive");
    Dataset ds;
    ds.kind = DatasetKind::lasso;
    ds.shared = gen_dictionary(m, n, seed);
    ds.mu = mu;
    ds.seed = seed;
    ds.instances.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, detail::payload_stream + static_cast<std::uint64_t>(i) * 2);
        Vector xi(static_cast<std::size_t>(m));
        for (double& v : xi) v = rng.gaussian();
        ds.instances[static_cast<std::size_t>(i)] = std::move(xi);
    }
    detail::attach_solutions(ds, [&](std::size_t i) {
        const LassoInstance inst{ds.shared, ds.instances[i], ds.mu};
        LassoOracleResult res = lasso_oracle(inst, 1e-10);
        ds.solutions[i] = std::move(res.w);
        ds.certificates[i] = res.gap;
    });
    detail::seeded_split(ds, seed);
    ds.validate();
    return ds;
}

namespace detail {

inline Dataset assemble_ot(int m, int n, std::vector<Vector> payloads, std::uint64_t seed) {
    Dataset ds;
    ds.kind = DatasetKind::ot;
    ds.shared = cost_matrix(m, n);
    ds.seed = seed;
    ds.instances = std::move(payloads);
    attach_solutions(ds, [&](std::size_t i) {
        const OtInstance inst = ot_instance_at(ds, static_cast<int>(i));
        inst.validate();
        OtExactResult res = ot_exact(inst, 1e-10);
        ds.solutions[i] = std::move(res.plan.plan.entries);
        ds.certificates[i] = res.certificate;
    });
    seeded_split(ds, seed);
    ds.validate();
    return ds;
}

} // namespace detail

/// Squared-distance cost, random marginals, network-simplex solutions.
inline Dataset build_ot_dataset(int m, int n, int count, std::uint64_t seed = 0) {
    if (count < 2) throw std::invalid_argument("build_ot_dataset: count >= 2 required");
    if (m < 1 || n < 1) throw std::invalid_argument("build_ot_dataset: m,n >= 1 required");
    std::vector<Vector> payloads(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        auto [alpha, beta] = gen_marginals(m, n, seed + 1 + static_cast<std::uint64_t>(i));
        Vector payload = std::move(alpha);
        payload.insert(payload.end(), beta.begin(), beta.end());
        payloads[static_cast<std::size_t>(i)] = std::move(payload);
    }
    return detail::assemble_ot(m, n, std::move(payloads), seed);
}

/// Marginals ingested from a CSV of alternating rows (alpha then beta per
/// instance, following the two-row single-instance format); each row is
/// validated nonnegative and normalized to sum one.
inline Dataset build_ot_dataset(int m, int n, const std::string& marginals_csv,
                                std::uint64_t seed = 0) {
    if (m < 1 || n < 1) throw std::invalid_argument("build_ot_dataset: m,n >= 1 required");
    std::ifstream in(marginals_csv);
    if (!in) throw load_error("cannot open marginals file: " + marginals_csv);
    std::vector<Vector> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Vector row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(tok, &pos);
                while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos])))
                    ++pos;
                if (pos != tok.size()) throw std::invalid_argument("trailing characters");
                row.push_back(v);
            } catch (const std::exception&) {
                throw parse_error("bad marginal value '" + tok + "'", lineno);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.size() % 2 != 0)
        throw load_error("marginals file must hold alpha/beta row pairs, got " +
                         std::to_string(rows.size()) + " rows");
    std::vector<Vector> payloads;
    payloads.reserve(rows.size() / 2);
    for (std::size_t p = 0; p < rows.size(); p += 2) {
        Vector& alpha = rows[p];
        Vector& beta = rows[p + 1];
        if (static_cast<int>(alpha.size()) != m || static_cast<int>(beta.size()) != n)
            throw load_error("marginal pair " + std::to_string(p / 2) + " has sizes (" +
                             std::to_string(alpha.size()) + "," + std::to_string(beta.size()) +
                             "), expected (" + std::to_string(m) + "," + std::to_string(n) + ")");
        for (Vector* r : {&alpha, &beta}) {
            double s = 0.0;
            for (double v : *r) {
                if (v < 0.0) throw load_error("negative marginal entry in pair " +
                                              std::to_string(p / 2));
                s += v;
            }
            if (!(s > 0.0)) throw load_error("marginal row sums to zero in pair " +
                                             std::to_string(p / 2));
            for (double& v : *r) v /= s;
        }
        Vector payload = std::move(alpha);
        payload.insert(payload.end(), beta.begin(), beta.end());
        payloads.push_back(std::move(payload));
    }
    return detail::assemble_ot(m, n, std::move(payloads), seed);
}

// ---------------------------------------------------------------------------
// serialization: JSON manifest + CSV payloads

namespace detail {

inline constexpr int dataset_format_version = 1;

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// shortest representation that round-trips exactly
inline void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline void append_row(std::string& out, const double* vals, std::size_t count) {
    for (std::size_t j = 0; j < count; ++j) {
        if (j > 0) out += ',';
        append_double(out, vals[j]);
    }
    out += '\n';
}

inline std::string render_matrix_csv(const DenseMatrix& mat) {
    std::string out;
    for (int i = 0; i < mat.rows; ++i)
        append_row(out, mat.entries.data() + static_cast<std::size_t>(i) * mat.cols,
                   static_cast<std::size_t>(mat.cols));
    return out;
}

inline std::string render_rows_csv(const std::vector<Vector>& rows) {
    std::string out;
    for (const Vector& r : rows) append_row(out, r.data(), r.size());
    return out;
}

// instance payloads: one row per lasso signal, alpha/beta row pairs for ot
inline std::string render_instances_csv(const Dataset& ds) {
    if (ds.kind == DatasetKind::lasso) return render_rows_csv(ds.instances);
    std::string out;
    const auto m = static_cast<std::size_t>(ds.m());
    for (const Vector& payload : ds.instances) {
        append_row(out, payload.data(), m);
        append_row(out, payload.data() + m, payload.size() - m);
    }
    return out;
}

inline void atomic_write(const std::filesystem::path& target, const std::string& bytes) {
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw load_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

// strict locale-independent parse of a full CSV payload; failures are load
// errors since checksums have already vouched for the bytes
inline std::vector<Vector> parse_rows_csv(const std::string& text, const std::string& name) {
    std::vector<Vector> rows;
    std::size_t pos = 0;
    long lineno = 0;
    while (pos < text.size()) {
        ++lineno;
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (eol > pos) {
            Vector row;
            std::size_t start = pos;
            while (start <= eol) {
                std::size_t comma = text.find(',', start);
                if (comma == std::string::npos || comma > eol) comma = eol;
                double v = 0.0;
                const auto res = std::from_chars(text.data() + start, text.data() + comma, v);
                if (res.ec != std::errc{} || res.ptr != text.data() + comma)
                    throw load_error(name + ": bad numeric field at line " +
                                     std::to_string(lineno));
                row.push_back(v);
                if (comma == eol) break;
                start = comma + 1;
            }
            rows.push_back(std::move(row));
        }
        pos = eol + 1;
    }
    return rows;
}

} // namespace detail

/// Write dir/manifest.json plus shared.csv, instances.csv, solutions.csv.
/// Each file lands via temp + rename; (params, seed) determine the bytes.
inline void save_dataset(const Dataset& ds, const std::string& dir) {
    ds.validate();
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);

    const std::string shared_bytes = detail::render_matrix_csv(ds.shared);
    const std::string inst_bytes = detail::render_instances_csv(ds);
    const std::string sol_bytes = detail::render_rows_csv(ds.solutions);

    nlohmann::json manifest;
    manifest["format_version"] = detail::dataset_format_version;
    manifest["kind"] = kind_name(ds.kind);
    manifest["m"] = ds.m();
    manifest["n"] = ds.n();
    manifest["count"] = ds.count();
    manifest["mu"] = ds.mu;
    manifest["seed"] = ds.seed;
    manifest["train_indices"] = ds.train_indices;
    manifest["test_indices"] = ds.test_indices;
    manifest["certificates"] = ds.certificates;
    manifest["checksums"] = {{"shared.csv", detail::hex64(detail::fnv1a(shared_bytes))},
                             {"instances.csv", detail::hex64(detail::fnv1a(inst_bytes))},
                             {"solutions.csv", detail::hex64(detail::fnv1a(sol_bytes))}};

    detail::atomic_write(root / "shared.csv", shared_bytes);
    detail::atomic_write(root / "instances.csv", inst_bytes);
    detail::atomic_write(root / "solutions.csv", sol_bytes);
    detail::atomic_write(root / "manifest.json", manifest.dump(2) + "\n");
}

/// Re-run the machine-checkable certificate of every stored solution.
/// For lasso the duality gap is recomputed from the primal point alone; for
/// ot the plan is rechecked nonnegative with marginal sums within 1e-9.
inline void verify_solutions(const Dataset& ds) {
    for (int i = 0; i < ds.count(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (ds.kind == DatasetKind::lasso) {
            const double gap = certified_gap(lasso_instance_at(ds, i), ds.solutions[idx]);
            if (!(gap <= 1e-8))
                throw load_error("solution " + std::to_string(i) +
                                 " failed recertification: gap " + std::to_string(gap));
        } else {
            const OtInstance inst = ot_instance_at(ds, i);
            const Vector& plan = ds.solutions[idx];
            const int m = ds.m();
            const int n = ds.n();
            for (double v : plan)
                if (v < -1e-12)
                    throw load_error("solution " + std::to_string(i) + " has negative mass");
            for (int r = 0; r < m; ++r) {
                double s = 0.0;
                for (int c = 0; c < n; ++c) s += plan[static_cast<std::size_t>(r) * n + c];
                if (std::abs(s - inst.alpha[static_cast<std::size_t>(r)]) > 1e-9)
                    throw load_error("solution " + std::to_string(i) + " violates row marginal " +
                                     std::to_string(r));
            }
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int r = 0; r < m; ++r) s += plan[static_cast<std::size_t>(r) * n + c];
                if (std::abs(s - inst.beta[static_cast<std::size_t>(c)]) > 1e-9)
                    throw load_error("solution " + std::to_string(i) + " violates column marginal " +
                                     std::to_string(c));
            }
        }
    }
}

/// Read a dataset directory back; checksum or version trouble raises a load
/// error, and every solution is recertified before the dataset is returned.
inline Dataset load_dataset(const std::string& dir) {
    const std::filesystem::path root(dir);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(detail::read_file(root / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw load_error("manifest.json: " + std::string(e.what()));
    }

    Dataset ds;
    try {
        const int version = manifest.at("format_version").get<int>();
        if (version != detail::dataset_format_version)
            throw load_error("unsupported format version " + std::to_string(version));
        ds.kind = kind_from_name(manifest.at("kind").get<std::string>());
        const int m = manifest.at("m").get<int>();
        const int n = manifest.at("n").get<int>();
        const int count = manifest.at("count").get<int>();
        ds.mu = manifest.at("mu").get<double>();
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.train_indices = manifest.at("train_indices").get<std::vector<int>>();
        ds.test_indices = manifest.at("test_indices").get<std::vector<int>>();
        ds.certificates = manifest.at("certificates").get<std::vector<double>>();
        const auto& checksums = manifest.at("checksums");

        const auto load_payload = [&](const char* name) {
            const std::string bytes = detail::read_file(root / name);
            const std::string expect = checksums.at(name).get<std::string>();
            if (detail::hex64(detail::fnv1a(bytes)) != expect)
                throw load_error(std::string(name) + ": checksum mismatch");
            return detail::parse_rows_csv(bytes, name);
        };

        const std::vector<Vector> shared_rows = load_payload("shared.csv");
        if (static_cast<int>(shared_rows.size()) != m)
            throw load_error("shared.csv: expected " + std::to_string(m) + " rows");
        ds.shared = DenseMatrix(m, n);
        for (int i = 0; i < m; ++i) {
            if (static_cast<int>(shared_rows[static_cast<std::size_t>(i)].size()) != n)
                throw load_error("shared.csv: row width mismatch at row " + std::to_string(i));
            for (int j = 0; j < n; ++j)
                ds.shared(i, j) = shared_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }

        std::vector<Vector> inst_rows = load_payload("instances.csv");
        if (ds.kind == DatasetKind::lasso) {
            ds.instances = std::move(inst_rows);
        } else {
            if (inst_rows.size() != static_cast<std::size_t>(count) * 2)
                throw load_error("instances.csv: expected " + std::to_string(count * 2) +
                                 " alternating marginal rows");
            ds.instances.reserve(static_cast<std::size_t>(count));
            for (std::size_t p = 0; p < inst_rows.size(); p += 2) {
                Vector payload = std::move(inst_rows[p]);
                payload.insert(payload.end(), inst_rows[p + 1].begin(), inst_rows[p + 1].end());
                ds.instances.push_back(std::move(payload));
            }
        }
        if (static_cast<int>(ds.instances.size()) != count)
            throw load_error("instances.csv: expected " + std::to_string(count) + " instances");

        ds.solutions = load_payload("solutions.csv");
    } catch (const nlohmann::json::exception& e) {
        throw load_error("manifest.json: " + std::string(e.what()));
    }

    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw load_error(std::string("loaded dataset invalid: ") + e.what());
    }
    verify_solutions(ds);
    return ds;
}

} // namespace palm
