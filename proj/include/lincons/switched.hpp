#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "lincons/classify.hpp"
#include "lincons/report.hpp"

namespace lincons {

/// Symmetric block matrix with the coupling sign convention: diagonal blocks
/// L_ii, off-diagonal blocks -L_ij where each coupling L_ij is symmetric
/// positive definite and L_ii equals the sum of the couplings in its row.
/// Such a matrix has exactly m zero eigenvalues and a positive (m+1)-th one.
struct BlockLaplacian {
    Index n = 0, m = 0;
    Matrix L;  ///< full mn-by-mn matrix (off-diagonal blocks carry the minus sign)

    /// The positive-definite coupling block L_ij for i != j.
    [[nodiscard]] Matrix coupling(Index i, Index j) const { return -Matrix(block_of(L, m, i, j)); }
};

/// Structural check: symmetry, positive-definite couplings, diagonal row-sum identity.
inline CheckReport is_block_laplacian(const Matrix& L, Index n, Index m,
                                      const TolerancePolicy& tol = {}) {
    tol.validate();
    require_finite(L, "is_block_laplacian");
    if (L.rows() != n * m || L.cols() != n * m)
        throw InputError("is_block_laplacian: matrix order does not match n*m");

    CheckReport report;
    const double scale = max_abs(L);
    report.add("symmetric", nearly_zero(Matrix(L - L.transpose()), scale, tol));

    bool couplings_ok = true;
    std::string coupling_detail;
    const double pd_band = tol.eig_zero_rel * std::max(1.0, scale);
    for (Index i = 0; i < n && couplings_ok; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const Matrix K = -Matrix(block_of(L, m, i, j));
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (K + K.transpose()));
            if (es.eigenvalues()(0) <= pd_band) {
                couplings_ok = false;
                coupling_detail = "coupling (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ") is not positive definite";
                break;
            }
        }
    }
    report.add("off-diagonal couplings positive definite", couplings_ok, coupling_detail);

    bool diag_ok = true;
    std::string diag_detail;
    for (Index i = 0; i < n; ++i) {
        Matrix sum = Matrix::Zero(m, m);
        for (Index j = 0; j < n; ++j)
            if (j != i) sum -= block_of(L, m, i, j);
        if (!nearly_equal(Matrix(block_of(L, m, i, i)), sum, tol)) {
            diag_ok = false;
            diag_detail = "diagonal block " + std::to_string(i + 1) + " differs from its coupling row sum";
            break;
        }
    }
    report.add("diagonal blocks equal coupling row sums", diag_ok, diag_detail);
    return report;
}

/// Spectrum side of the block-Laplacian property: exactly m eigenvalues in the
/// zero band, a strictly positive (m+1)-th eigenvalue, and a zero eigenspace
/// spanning the agreement subspace.
inline CheckReport block_laplacian_spectrum_check(const BlockLaplacian& bl,
                                                  const TolerancePolicy& tol = {}) {
    tol.validate();
    CheckReport report;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (bl.L + bl.L.transpose()));
    const Vector evals = es.eigenvalues();  // ascending
    const double sigma_max = std::max(std::abs(evals(0)), std::abs(evals(evals.size() - 1)));
    const double band = tol.eig_zero_rel * sigma_max;

    Index zeros = 0;
    for (Index i = 0; i < evals.size(); ++i)
        if (std::abs(evals(i)) < band) ++zeros;
    report.add("exactly m zero eigenvalues", zeros == bl.m,
               "counted " + std::to_string(zeros) + ", expected " + std::to_string(bl.m));
    report.add("eigenvalue m+1 strictly positive", evals.size() > bl.m && evals(bl.m) > band,
               "lambda_{m+1} = " + std::to_string(evals.size() > bl.m ? evals(bl.m) : 0.0));

    const Matrix zero_vectors = es.eigenvectors().leftCols(bl.m);
    const Matrix residual = zero_vectors - agreement_projector(bl.n, bl.m) * zero_vectors;
    report.add("zero eigenspace spans the agreement subspace", nearly_zero(residual, 1.0, tol));
    return report;
}

/// Evaluates x^T L x two ways: directly, and as the half double sum of
/// coupling-weighted block differences. The two must agree.
inline std::pair<double, double> quadratic_form_identity(const BlockLaplacian& bl, const Vector& x) {
    if (x.size() != bl.n * bl.m)
        throw InputError("quadratic_form_identity: state dimension mismatch");
    const double direct = x.dot(bl.L * x);
    double pairwise = 0.0;
    for (Index i = 0; i < bl.n; ++i) {
        for (Index j = 0; j < bl.n; ++j) {
            if (i == j) continue;
            const Vector diff = vector_block(x, bl.m, i) - vector_block(x, bl.m, j);
            pairwise += 0.5 * diff.dot(bl.coupling(i, j) * diff);
        }
    }
    return {direct, pairwise};
}

/// Seeded random block Laplacian: couplings Q^T Q + 0.1 I assembled
/// symmetrically, diagonal from the row-sum identity.
inline BlockLaplacian random_block_laplacian(Index n, Index m, std::uint64_t seed) {
    if (n < 2 || m < 1) throw InputError("random_block_laplacian: need n >= 2 and m >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix L = Matrix::Zero(n * m, n * m);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            Matrix Q(m, m);
            for (Index a = 0; a < m; ++a)
                for (Index b = 0; b < m; ++b) Q(a, b) = normal(rng);
            const Matrix K = Q.transpose() * Q + 0.1 * Matrix::Identity(m, m);
            block_of(L, m, i, j) = -K;
            block_of(L, m, j, i) = -K;
        }
    }
    for (Index i = 0; i < n; ++i) {
        Matrix sum = Matrix::Zero(m, m);
        for (Index j = 0; j < n; ++j)
            if (j != i) sum -= block_of(L, m, i, j);
        block_of(L, m, i, i) = sum;
    }
    return BlockLaplacian{n, m, std::move(L)};
}

/// Graph Laplacian L = B B^T from an oriented incidence matrix whose columns
/// hold exactly one +1 and one -1.
inline Matrix laplacian_from_incidence(const Matrix& B_inc) {
    require_finite(B_inc, "laplacian_from_incidence");
    for (Index j = 0; j < B_inc.cols(); ++j) {
        Index plus = 0, minus = 0;
        for (Index i = 0; i < B_inc.rows(); ++i) {
            const double e = B_inc(i, j);
            if (e == 1.0) ++plus;
            else if (e == -1.0) ++minus;
            else if (e != 0.0)
                throw InputError("laplacian_from_incidence: column " + std::to_string(j + 1) +
                                 " has an entry outside {0, +1, -1}");
        }
        if (plus != 1 || minus != 1)
            throw InputError("laplacian_from_incidence: column " + std::to_string(j + 1) +
                             " must contain exactly one +1 and one -1");
    }
    return B_inc * B_inc.transpose();
}

/// Family of subsystems sharing one consensus functional chi(x) = F x.
struct SwitchedSystem {
    std::vector<SystemMatrix> subsystems;
    Matrix F;  ///< m-by-mn common consensus functional [F_1, ..., F_n]

    [[nodiscard]] Index n() const { return subsystems.empty() ? 0 : subsystems.front().n; }
    [[nodiscard]] Index m() const { return subsystems.empty() ? 0 : subsystems.front().m; }

    [[nodiscard]] Matrix f_block(Index i) const { return F.middleCols(i * m(), m()); }

    /// Block diagonal of F_1..F_n; the Lyapunov weight.
    [[nodiscard]] Matrix theta() const {
        const Index mn = n() * m();
        Matrix Th = Matrix::Zero(mn, mn);
        for (Index i = 0; i < n(); ++i) block_of(Th, m(), i, i) = f_block(i);
        return Th;
    }

    void validate() const {
        if (subsystems.empty()) throw InputError("SwitchedSystem: no subsystems");
        for (const auto& s : subsystems) {
            s.validate();
            if (s.n != n() || s.m != m())
                throw InputError("SwitchedSystem: subsystems disagree on (n, m)");
        }
        if (F.rows() != m() || F.cols() != n() * m())
            throw InputError("SwitchedSystem: F must be m x mn");
        require_finite(F, "SwitchedSystem");
    }
};

/// Piecewise-constant schedule: (duration, subsystem index) segments.
struct SwitchingSignal {
    struct Segment {
        double duration = 0.0;
        std::size_t subsystem = 0;  ///< 0-based index into the subsystem list
    };

    std::vector<Segment> segments;

    [[nodiscard]] double total_time() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }

    void validate(std::size_t subsystem_count) const {
        if (segments.empty()) throw InputError("SwitchingSignal: empty schedule");
        for (const auto& s : segments) {
            if (!(s.duration > 0.0)) throw InputError("SwitchingSignal: durations must be positive");
            if (s.subsystem >= subsystem_count)
                throw InputError("SwitchingSignal: subsystem index " +
                                 std::to_string(s.subsystem + 1) + " out of range");
        }
    }
};

/// Seeded random schedule with dwell times uniform in [dwell_lo, dwell_hi],
/// truncated so the total time lands exactly on total_time.
inline SwitchingSignal random_switching_signal(std::size_t subsystem_count, double total_time,
                                               double dwell_lo, double dwell_hi,
                                               std::uint64_t seed) {
    if (subsystem_count == 0) throw InputError("random_switching_signal: no subsystems");
    if (!(total_time > 0.0) || !(dwell_lo > 0.0) || !(dwell_hi >= dwell_lo))
        throw InputError("random_switching_signal: need 0 < dwell_lo <= dwell_hi and total_time > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dwell(dwell_lo, dwell_hi);
    std::uniform_int_distribution<std::size_t> pick(0, subsystem_count - 1);
    SwitchingSignal signal;
    double t = 0.0;
    while (t < total_time) {
        double d = dwell(rng);
        if (t + d >= total_time) d = total_time - t;
        if (!(d > 0.0)) break;
        signal.segments.push_back({d, pick(rng)});
        t += d;
    }
    return signal;
}

/// Sampled solution of the switched system: states, disagreement vector
/// delta(t) = x(t) - (agreement state at chi(x(0))), and V = delta^T Theta delta.
struct Trajectory {
    std::vector<double> sample_times;
    std::vector<Vector> states;
    std::vector<Vector> delta;
    std::vector<double> V;
    std::vector<std::size_t> active;  ///< subsystem driving each sample
    Vector chi0;                      ///< group decision value F x(0)
};

/// Verifies assumptions on every subsystem: consensus solvability, symmetric
/// positive-definite couplings, diagonal row-sum identity, the shared
/// functional (F A_s = 0, F_i positive definite, block sum I), commutation of
/// F_i with the couplings, and the Lyapunov key step that -(Theta A_s +
/// A_s^T Theta^T) is a block Laplacian.
inline CheckReport check_switched_assumptions(const SwitchedSystem& sys,
                                              const TolerancePolicy& tol = {}) {
    tol.validate();
    sys.validate();
    const Index n = sys.n(), m = sys.m();
    CheckReport report;

    Matrix f_sum = Matrix::Zero(m, m);
    bool f_pd = true;
    std::string f_detail;
    const double f_scale = std::max(1.0, max_abs(sys.F));
    for (Index i = 0; i < n; ++i) {
        const Matrix Fi = sys.f_block(i);
        f_sum += Fi;
        if (!nearly_zero(Matrix(Fi - Fi.transpose()), f_scale, tol)) {
            f_pd = false;
            f_detail = "F_" + std::to_string(i + 1) + " is not symmetric";
            break;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Fi + Fi.transpose()));
        if (es.eigenvalues()(0) <= tol.eig_zero_rel * f_scale) {
            f_pd = false;
            f_detail = "F_" + std::to_string(i + 1) + " is not positive definite";
            break;
        }
    }
    report.add("F blocks symmetric positive definite", f_pd, f_detail);
    report.add("F blocks sum to identity", nearly_equal(f_sum, Matrix::Identity(m, m), tol));

    const Matrix theta = sys.theta();
    for (std::size_t s = 0; s < sys.subsystems.size(); ++s) {
        const SystemMatrix& sub = sys.subsystems[s];
        const std::string tag = "subsystem " + std::to_string(s + 1);
        const double a_scale = max_abs(sub.A);

        const ConsensusVerdict verdict = classify_consensus(sub, tol);
        report.add(tag + ": solves a consensus problem", verdict.solves == Solvability::Yes,
                   std::string("verdict ") + to_string(verdict.solves));

        bool couplings_ok = true;
        std::string c_detail;
        const double pd_band = tol.eig_zero_rel * std::max(1.0, a_scale);
        for (Index i = 0; i < n && couplings_ok; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const Matrix K = sub.block(i, j);
                if (!nearly_zero(Matrix(K - K.transpose()), a_scale, tol)) {
                    couplings_ok = false;
                    c_detail = "block (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                               ") is not symmetric";
                    break;
                }
                Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (K + K.transpose()));
                if (es.eigenvalues()(0) <= pd_band) {
                    couplings_ok = false;
                    c_detail = "block (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                               ") is not positive definite";
                    break;
                }
            }
        }
        report.add(tag + ": off-diagonal blocks symmetric positive definite", couplings_ok, c_detail);

        bool diag_ok = true;
        for (Index i = 0; i < n; ++i) {
            Matrix sum = Matrix::Zero(m, m);
            for (Index j = 0; j < n; ++j)
                if (j != i) sum -= sub.block(i, j);
            if (!nearly_equal(Matrix(sub.block(i, i)), sum, tol)) {
                diag_ok = false;
                break;
            }
        }
        report.add(tag + ": diagonal blocks equal negative coupling row sums", diag_ok);

        report.add(tag + ": shared functional annihilates A (F A = 0)",
                   nearly_zero(Matrix(sys.F * sub.A), f_scale * std::max(1.0, a_scale), tol));

        bool commute = true;
        std::string commute_detail;
        for (Index i = 0; i < n && commute; ++i) {
            const Matrix Fi = sys.f_block(i);
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const Matrix K = sub.block(i, j);
                if (!nearly_zero(Matrix(Fi * K - K * Fi), f_scale * std::max(1.0, a_scale), tol)) {
                    commute = false;
                    commute_detail = "F_" + std::to_string(i + 1) + " does not commute with block (" +
                                     std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
                    break;
                }
            }
        }
        report.add(tag + ": F blocks commute with couplings", commute, commute_detail);

        const Matrix Ls = -(theta * sub.A + sub.A.transpose() * theta.transpose());
        const CheckReport lap = is_block_laplacian(Ls, n, m, tol);
        const auto* failure = lap.first_failure();
        report.add(tag + ": -(Theta A + A^T Theta^T) is a block Laplacian", lap.pass(),
                   failure ? failure->name : "");
    }
    return report;
}

/// Exact piecewise propagation of x' = A_{s(t)} x: within each segment the
/// state advances by the matrix exponential, so there is no truncation error
/// beyond the exponential itself. Samples sit on the sample_dt grid plus every
/// switch instant. Unless `unsafe` is set, the assumptions report must pass.
inline Trajectory simulate_switched(const SwitchedSystem& sys, const SwitchingSignal& signal,
                                    const Vector& x0, double sample_dt,
                                    const TolerancePolicy& tol = {}, bool unsafe = false) {
    tol.validate();
    sys.validate();
    signal.validate(sys.subsystems.size());
    if (!(sample_dt > 0.0)) throw InputError("simulate_switched: sample_dt must be positive");
    if (x0.size() != sys.n() * sys.m())
        throw InputError("simulate_switched: initial state has dimension " +
                         std::to_string(x0.size()) + ", expected " +
                         std::to_string(sys.n() * sys.m()));
    if (!x0.allFinite()) throw InputError("simulate_switched: non-finite initial state");

    if (!unsafe) {
        const CheckReport assumptions = check_switched_assumptions(sys, tol);
        if (!assumptions.pass()) {
            const auto* failure = assumptions.first_failure();
            throw StructuralError("simulate_switched: assumption failed: " + failure->name +
                                  (failure->detail.empty() ? "" : " (" + failure->detail + ")"));
        }
    }

    Trajectory traj;
    traj.chi0 = sys.F * x0;
    const Vector target = stacked_identities(sys.n(), sys.m()) * traj.chi0;
    const Matrix theta = sys.theta();
    const double total = signal.total_time();
    const double time_eps = 1e-12 * std::max(1.0, total);

    auto emit = [&](double t, const Vector& x, std::size_t active) {
        if (!x.allFinite())
            throw ComputationError("simulate_switched: non-finite state at t = " + std::to_string(t));
        traj.sample_times.push_back(t);
        traj.states.push_back(x);
        traj.delta.push_back(x - target);
        traj.V.push_back(traj.delta.back().dot(theta * traj.delta.back()));
        traj.active.push_back(active);
    };

    emit(0.0, x0, signal.segments.front().subsystem);

    double seg_start = 0.0;
    Vector anchor = x0;
    for (const auto& seg : signal.segments) {
        const double seg_end = seg_start + seg.duration;
        const Matrix& A = sys.subsystems[seg.subsystem].A;

        // Grid samples strictly inside the segment, then the switch instant.
        std::vector<double> offsets;
        for (Index k = static_cast<Index>(std::floor(seg_start / sample_dt)) + 1;; ++k) {
            const double t = static_cast<double>(k) * sample_dt;
            if (t >= seg_end - time_eps) break;
            if (t > seg_start + time_eps) offsets.push_back(t - seg_start);
        }
        offsets.push_back(seg.duration);

        Vector segment_end_state = anchor;
        for (double offset : offsets) {
            const Vector x = matrix_exponential(Matrix(A * offset)) * anchor;
            emit(seg_start + offset, x, seg.subsystem);
            segment_end_state = x;
        }
        anchor = segment_end_state;
        seg_start = seg_end;
    }
    return traj;
}

/// Checks a simulated trajectory against the common-Lyapunov certificate:
/// (a) V nonincreasing with slack 1e-12 V(0);
/// (b) at interior samples whose neighbors share the segment, the central
///     finite-difference slope of V respects dV/dt <= -lambda_{m+1} |delta_2|^2
///     + slack, with lambda_{m+1} taken from L_s = -(Theta A_s + A_s^T Theta^T)
///     and delta_2 the component of delta orthogonal to the agreement subspace;
/// (c) F delta = 0 at every sample (1e-8).
inline CheckReport lyapunov_audit(const Trajectory& traj, const SwitchedSystem& sys,
                                  const TolerancePolicy& tol = {}) {
    tol.validate();
    sys.validate();
    if (traj.sample_times.empty()) throw InputError("lyapunov_audit: empty trajectory");
    CheckReport report;

    const double v0 = traj.V.front();
    // Absolute floor covering pure floating-point noise when V is identically zero.
    const double rounding_floor = 1e-20 * std::max(1.0, traj.states.front().squaredNorm()) *
                                  std::max(1.0, max_abs(sys.theta()));
    const double slack_monotone = 1e-12 * v0 + rounding_floor;

    bool nonincreasing = true;
    std::string mono_detail;
    for (std::size_t k = 0; k + 1 < traj.V.size(); ++k) {
        if (traj.V[k + 1] > traj.V[k] + slack_monotone) {
            nonincreasing = false;
            mono_detail = "V rises at t = " + std::to_string(traj.sample_times[k + 1]);
            break;
        }
    }
    report.add("V nonincreasing", nonincreasing, mono_detail);

    const Matrix theta = sys.theta();
    std::vector<double> lambda_m1(sys.subsystems.size());
    for (std::size_t s = 0; s < sys.subsystems.size(); ++s) {
        const Matrix& A = sys.subsystems[s].A;
        const Matrix Ls = -(theta * A + A.transpose() * theta.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Ls + Ls.transpose()));
        lambda_m1[s] = es.eigenvalues()(sys.m());
    }

    const Matrix away = Matrix::Identity(sys.n() * sys.m(), sys.n() * sys.m()) -
                        agreement_projector(sys.n(), sys.m());
    const double slack_rate = 1e-6 * v0 + rounding_floor;
    bool rate_ok = true;
    std::string rate_detail;
    std::size_t rate_samples = 0;
    for (std::size_t k = 1; k + 1 < traj.sample_times.size(); ++k) {
        if (traj.active[k - 1] != traj.active[k] || traj.active[k + 1] != traj.active[k]) continue;
        ++rate_samples;
        const double dv = (traj.V[k + 1] - traj.V[k - 1]) /
                          (traj.sample_times[k + 1] - traj.sample_times[k - 1]);
        const Vector delta2 = away * traj.delta[k];
        const double bound = -lambda_m1[traj.active[k]] * delta2.squaredNorm();
        if (dv > bound + slack_rate) {
            rate_ok = false;
            rate_detail = "decrease bound violated at t = " + std::to_string(traj.sample_times[k]);
            break;
        }
    }
    report.add("decrease rate bounded by -lambda_{m+1} |delta_2|^2", rate_ok,
               rate_ok ? std::to_string(rate_samples) + " interior samples checked" : rate_detail);

    double worst_f_delta = 0.0;
    for (const auto& d : traj.delta)
        worst_f_delta = std::max(worst_f_delta, (sys.F * d).cwiseAbs().maxCoeff());
    report.add("F delta = 0 along the trajectory", worst_f_delta <= 1e-8,
               "max |F delta| = " + std::to_string(worst_f_delta));
    return report;
}

/// CSV export: header `t,x_1..x_mn,V`, one row per sample; switch instants are
/// sample points by construction.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Index mn = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (Index i = 0; i < mn; ++i) out << ",x_" << (i + 1);
    out << ",V\n";
    out.precision(17);
    for (std::size_t k = 0; k < traj.sample_times.size(); ++k) {
        out << traj.sample_times[k];
        for (Index i = 0; i < mn; ++i) out << ',' << traj.states[k](i);
        out << ',' << traj.V[k] << '\n';
    }
}

}  // namespace lincons
