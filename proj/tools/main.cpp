// Command-line front end: classification, consensus-function extraction,
// similarity synthesis/retargeting, switched simulation, and graph Laplacians.
//
// Exit codes:
//   0  success (classify: solves; simulate: audit passed)
//   1  negative result (classify: does not solve; simulate: audit failed)
//   2  classify: indeterminate
//   3  domain error: a structural precondition on the input fails
//   64 usage error, 65 malformed input data, 66 missing input file,
//   70 internal error

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "lincons/lincons.hpp"
#include "lincons/sim_config.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitInternal = 70;
constexpr int kExitDomain = 3;

double env_or(const char* name, double fallback) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return fallback;
    try {
        return std::stod(raw);
    } catch (const std::exception&) {
        throw lincons::InputError(std::string(name) + ": '" + raw + "' is not a number");
    }
}

lincons::TolerancePolicy tolerance_defaults() {
    lincons::TolerancePolicy tol;
    tol.rank_rel = env_or("LINCONS_RANK_REL", tol.rank_rel);
    tol.eig_zero_rel = env_or("LINCONS_EIG_ZERO_REL", tol.eig_zero_rel);
    tol.convergence_abs = env_or("LINCONS_CONVERGENCE_ABS", tol.convergence_abs);
    return tol;
}

void add_tolerance_flags(CLI::App* cmd, lincons::TolerancePolicy& tol) {
    cmd->add_option("--rank-rel", tol.rank_rel, "Relative singular-value cutoff for rank decisions");
    cmd->add_option("--eig-zero-rel", tol.eig_zero_rel, "Relative zero band for eigenvalues");
    cmd->add_option("--convergence-abs", tol.convergence_abs,
                    "Absolute tolerance for limit and trajectory checks");
}

void require_readable(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory), path);
}

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", v);
    return buffer;
}

void print_matrix(std::ostream& out, const lincons::Matrix& M, const char* indent = "  ") {
    for (lincons::Index r = 0; r < M.rows(); ++r) {
        out << indent;
        for (lincons::Index c = 0; c < M.cols(); ++c) {
            if (c > 0) out << ' ';
            out << fmt(M(r, c));
        }
        out << '\n';
    }
}

nlohmann::json report_to_json(const lincons::CheckReport& report) {
    nlohmann::json clauses = nlohmann::json::array();
    for (const auto& c : report.clauses)
        clauses.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return clauses;
}

int run_classify(const std::string& path, bool as_json, const lincons::TolerancePolicy& tol) {
    require_readable(path);
    const lincons::SystemMatrix sys = lincons::read_matrix_file(path);
    const lincons::ConsensusVerdict v = lincons::classify_consensus(sys, tol);

    if (as_json) {
        nlohmann::json eigs = nlohmann::json::array();
        for (std::size_t i = 0; i < v.spectrum.eigenvalues.size(); ++i)
            eigs.push_back({{"re", v.spectrum.eigenvalues[i].real()},
                            {"im", v.spectrum.eigenvalues[i].imag()},
                            {"class", lincons::to_string(v.eigen_classes[i])}});
        nlohmann::json out = {{"n", sys.n},
                              {"m", sys.m},
                              {"solves", lincons::to_string(v.solves)},
                              {"rank_A", v.rank_A},
                              {"rank_A2", v.rank_A2},
                              {"dimN_A", v.dimN_A},
                              {"dimN_A2", v.dimN_A2},
                              {"dimN_C", v.dimN_C},
                              {"kernel_is_agreement", v.kernel_agreement},
                              {"eigenvalues", eigs},
                              {"reasons", v.reasons}};
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "system: n = " << sys.n << " agents, m = " << sys.m
                  << " states/agent (order " << sys.order() << ")\n";
        std::cout << "verdict: " << lincons::to_string(v.solves) << '\n';
        std::cout << "rank(A) = " << v.rank_A << ", rank(A^2) = " << v.rank_A2
                  << ", dim N(A) = " << v.dimN_A << ", dim N(A^2) = " << v.dimN_A2
                  << ", dim N(stacked C) = " << v.dimN_C << '\n';
        std::cout << "kernel is agreement subspace: " << (v.kernel_agreement ? "yes" : "no") << '\n';
        std::cout << "eigenvalues:\n";
        for (std::size_t i = 0; i < v.spectrum.eigenvalues.size(); ++i) {
            const auto lambda = v.spectrum.eigenvalues[i];
            std::cout << "  " << fmt(lambda.real()) << (lambda.imag() >= 0 ? " + " : " - ")
                      << fmt(std::abs(lambda.imag())) << "i  (" << to_string(v.eigen_classes[i])
                      << ")\n";
        }
        std::cout << "reasons:\n";
        for (const auto& r : v.reasons) std::cout << "  - " << r << '\n';
    }

    switch (v.solves) {
        case lincons::Solvability::Yes: return 0;
        case lincons::Solvability::No: return 1;
        case lincons::Solvability::Indeterminate: return 2;
    }
    return kExitInternal;
}

int run_chi(const std::string& path, bool limit_mode, bool average_check,
            const lincons::TolerancePolicy& tol) {
    require_readable(path);
    const lincons::SystemMatrix sys = lincons::read_matrix_file(path);

    if (limit_mode) {
        const lincons::ConsensusFunctional fn = lincons::consensus_functional_from_limit(sys, tol);
        std::cout << "limit matrix B = lim e^{At}:\n";
        print_matrix(std::cout, fn.limit);
        std::cout << "rank(B) = " << lincons::numeric_rank(fn.limit, tol) << '\n';
        std::cout << "consensus function chi(x) = E x, E = first block row of B:\n";
        print_matrix(std::cout, fn.E);
    } else {
        const lincons::Index expected_rank = (sys.n - 1) * sys.m;
        if (lincons::numeric_rank(sys.A, tol) != expected_rank)
            throw lincons::StructuralError(
                "the left-null construction needs rank(A) = (n-1)m; rerun with --limit");
        const lincons::ConsensusFunctional fn = lincons::consensus_function_method1(sys, tol);
        std::cout << "consensus function chi(x) = E x, E =\n";
        print_matrix(std::cout, fn.E);
        if (sys.m == 1) {
            const lincons::WeightedAverage w = lincons::consensus_function_scalar(sys, tol);
            std::cout << "weights y (chi(x) = sum y_i x_i / sum y_i):\n  ";
            for (lincons::Index i = 0; i < w.weights.size(); ++i) {
                if (i > 0) std::cout << ' ';
                std::cout << fmt(w.weights(i));
            }
            std::cout << "\nnormalizer sum(y) = " << fmt(w.normalizer) << '\n';
        }
    }

    if (average_check) {
        const lincons::CheckReport report = lincons::check_average_consensus(sys, tol);
        std::cout << "average consensus check:\n" << report.summary();
        std::cout << "average consensus: " << (report.pass() ? "yes" : "no") << '\n';
    }
    return 0;
}

int run_transform(const std::string& input, long n, long m, long r, bool average,
                  std::uint64_t seed, const std::string& prefix,
                  const lincons::TolerancePolicy& tol) {
    lincons::Matrix T;
    lincons::SystemMatrix result;

    if (!input.empty()) {
        if (n != 0 || m != 0 || r != 0)
            throw CLI::ValidationError("--n/--m/--r cannot be combined with --input");
        require_readable(input);
        const lincons::SystemMatrix sys = lincons::read_matrix_file(input);
        lincons::RetargetResult retargeted = lincons::retarget_to_average(sys, tol, seed);
        T = std::move(retargeted.T);
        result = std::move(retargeted.system);
    } else {
        if (n < 2 || m < 1) throw CLI::ValidationError("--n >= 2 and --m >= 1 are required");
        if (r == 0) r = m;
        if (r < 1 || r > m) throw CLI::ValidationError("--r must satisfy 1 <= r <= m");
        if (average && r != m)
            throw CLI::ValidationError("--average requires r = m (full kernel dimension)");
        const lincons::StructuredTransform st =
            lincons::construct_transform(n, m, seed, average);
        lincons::CanonicalForm form;
        form.r = r;
        form.M = lincons::random_stable_matrix(n * m - r, seed ^ 0xd1b54a32d192ed03ull);
        result = lincons::synthesize_system(st, form, tol);
        T = st.T;
    }

    // Re-verify before anything is written.
    const lincons::ConsensusVerdict verdict = lincons::classify_consensus(result, tol);
    if (verdict.solves != lincons::Solvability::Yes)
        throw lincons::InconsistencyError("self-check failed: output system classifies as " +
                                          std::string(lincons::to_string(verdict.solves)));
    const bool want_average = average || !input.empty();
    if (want_average && !lincons::check_average_consensus(result, tol).pass())
        throw lincons::InconsistencyError(
            "self-check failed: output system does not pass the average consensus check");

    const std::string t_path = prefix + "-T.mat";
    const std::string a_path = prefix + "-A.mat";
    lincons::write_matrix_file(t_path, lincons::SystemMatrix(result.n, result.m, T));
    lincons::write_matrix_file(a_path, result);
    std::cout << "wrote transform to " << t_path << " and system to " << a_path << '\n';
    std::cout << "verdict: yes" << (want_average ? ", average consensus: yes" : "") << '\n';
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& prefix, bool unsafe,
                 const lincons::TolerancePolicy& tol) {
    require_readable(config_path);
    std::ifstream in(config_path);
    const lincons::SimulationConfig cfg = lincons::parse_simulation_config(in, config_path);
    const auto base_dir = std::filesystem::path(config_path).parent_path();
    lincons::SimulationSetup setup = lincons::load_simulation(cfg, base_dir);

    if (!unsafe) {
        const lincons::CheckReport assumptions = lincons::check_switched_assumptions(setup.system, tol);
        if (!assumptions.pass()) {
            const auto* failure = assumptions.first_failure();
            std::cerr << "refusing to simulate, assumption failed: " << failure->name
                      << (failure->detail.empty() ? "" : " (" + failure->detail + ")")
                      << "\nuse --unsafe to simulate anyway\n";
            return kExitDomain;
        }
    }

    const lincons::Trajectory traj = lincons::simulate_switched(
        setup.system, setup.signal, setup.x0, setup.sample_dt, tol, /*unsafe=*/true);
    const lincons::CheckReport audit = lincons::lyapunov_audit(traj, setup.system, tol);

    const std::string csv_path = prefix + "-trajectory.csv";
    {
        std::ofstream csv(csv_path);
        if (!csv) throw lincons::InputError("cannot write '" + csv_path + "'");
        lincons::write_trajectory_csv(csv, traj);
    }

    const double final_disagreement = traj.delta.back().norm();
    nlohmann::json audit_json = {
        {"pass", audit.pass()},
        {"clauses", report_to_json(audit)},
        {"V", traj.V},
        {"final_disagreement_norm", final_disagreement},
        {"chi", std::vector<double>(traj.chi0.data(), traj.chi0.data() + traj.chi0.size())},
        {"sample_count", traj.sample_times.size()},
        {"total_time", setup.signal.total_time()}};
    const std::string audit_path = prefix + "-audit.json";
    {
        std::ofstream out(audit_path);
        if (!out) throw lincons::InputError("cannot write '" + audit_path + "'");
        out << audit_json.dump(2) << '\n';
    }

    std::cout << "wrote " << csv_path << " (" << traj.sample_times.size() << " samples) and "
              << audit_path << '\n';
    std::cout << audit.summary();
    std::cout << "final |delta| = " << fmt(final_disagreement) << '\n';
    std::cout << "audit: " << (audit.pass() ? "pass" : "fail") << '\n';
    return audit.pass() ? 0 : 1;
}

int run_graph_laplacian(const std::string& path) {
    require_readable(path);
    std::ifstream in(path);
    const auto edges = lincons::read_edge_list(in, path);
    const lincons::Matrix L = lincons::laplacian_from_incidence(lincons::incidence_from_edges(edges));
    lincons::write_matrix_file(std::cout, lincons::SystemMatrix(L.rows(), 1, L));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lincons — linear consensus systems: classify, extract chi, synthesize, simulate"};
    app.require_subcommand(1);

    lincons::TolerancePolicy tol;
    try {
        tol = tolerance_defaults();
    } catch (const lincons::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::string path;
    bool as_json = false;
    auto* classify = app.add_subcommand("classify", "Decide whether x' = Ax solves a consensus problem");
    classify->add_option("file", path, "matrix file")->required();
    classify->add_flag("--json", as_json, "machine-readable verdict");
    add_tolerance_flags(classify, tol);

    bool limit_mode = false, average_check = false;
    auto* chi = app.add_subcommand("chi", "Closed-form consensus function chi(x) = E x");
    chi->add_option("file", path, "matrix file")->required();
    chi->add_flag("--limit", limit_mode, "report lim e^{At} instead of the left-null construction");
    chi->add_flag("--average-check", average_check, "append the average-consensus report");
    add_tolerance_flags(chi, tol);

    std::string input, prefix = "transform";
    long n = 0, m = 0, r = 0;
    std::uint64_t seed = 0;
    bool average = false;
    auto* transform =
        app.add_subcommand("transform", "Synthesize a consensus system, or retarget one to average");
    transform->add_option("--n", n, "agent count");
    transform->add_option("--m", m, "per-agent state dimension");
    transform->add_option("--r", r, "kernel dimension of the canonical form (default m)");
    transform->add_flag("--average", average, "make the result solve the average consensus problem");
    transform->add_option("--seed", seed, "generator seed");
    transform->add_option("--input", input, "retarget this system to average consensus");
    transform->add_option("--out", prefix, "output file prefix");
    add_tolerance_flags(transform, tol);

    std::string sim_prefix = "sim";
    bool unsafe = false;
    auto* simulate = app.add_subcommand("simulate", "Simulate a switched system from a JSON config");
    simulate->add_option("config", path, "simulation config (JSON)")->required();
    simulate->add_option("--out", sim_prefix, "output file prefix");
    simulate->add_flag("--unsafe", unsafe, "skip the assumptions gate");
    add_tolerance_flags(simulate, tol);

    auto* graph = app.add_subcommand("graph-laplacian", "Graph Laplacian B B^T from an edge list");
    graph->add_option("edges", path, "edge list file, lines 'u v' with 1-based indices")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(classify)) return run_classify(path, as_json, tol);
        if (app.got_subcommand(chi)) return run_chi(path, limit_mode, average_check, tol);
        if (app.got_subcommand(transform))
            return run_transform(input, n, m, r, average, seed, prefix, tol);
        if (app.got_subcommand(simulate)) return run_simulate(path, sim_prefix, unsafe, tol);
        if (app.got_subcommand(graph)) return run_graph_laplacian(path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::system_error& e) {
        std::cerr << "error: cannot read input: " << e.what() << '\n';
        return kExitNoInput;
    } catch (const lincons::StructuralError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const lincons::ConditioningError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const lincons::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const lincons::Error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
