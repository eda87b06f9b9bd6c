#pragma once

// Monte Carlo ground truth: CN(0, 1/N) channels, exact mutual informations,
// eigenvalues of H^H H, and outage / conditioned-spectrum estimates.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "outage.hpp"

namespace ldmimo {

using cplx = std::complex<double>;

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using key_type = std::array<std::uint32_t, 2>;
    using counter_type = std::array<std::uint32_t, 4>;

    Philox4x32() = default;
    explicit Philox4x32(key_type key, counter_type ctr = {}) : key_(key), ctr_(ctr) {}

    /// Key derived from (seed, stream) through two rounds of splitmix64.
    static Philox4x32 for_stream(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t h = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
        return Philox4x32({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)});
    }

    static constexpr std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// One 10-round block for the given counter and key.
    static counter_type block(counter_type c, key_type k) {
        constexpr std::uint64_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = m0 * c[0];
            const std::uint64_t p1 = m1 * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return c;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xFFFFFFFFu; }

    result_type operator()() {
        if (pos_ == 4) {
            buf_ = block(ctr_, key_);
            for (auto& w : ctr_) {
                if (++w != 0) break;
            }
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform double in (0, 1] with 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return double(bits + 1) * 0x1.0p-53;
    }

private:
    key_type key_{};
    counter_type ctr_{};
    counter_type buf_{};
    int pos_ = 4;
};

/// Dense column-major complex matrix.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<cplx> data;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * c) {}

    cplx& operator()(int i, int j) { return data[std::size_t(j) * rows + i]; }
    const cplx& operator()(int i, int j) const { return data[std::size_t(j) * rows + i]; }

    static CMatrix identity(int n) {
        CMatrix a(n, n);
        for (int i = 0; i < n; ++i) a(i, i) = 1.0;
        return a;
    }
};

/// H^H H for an m x n matrix H.
inline CMatrix gram(const CMatrix& h) {
    CMatrix g(h.cols, h.cols);
    for (int j = 0; j < h.cols; ++j) {
        for (int i = 0; i <= j; ++i) {
            cplx s = 0.0;
            for (int k = 0; k < h.rows; ++k) s += std::conj(h(k, i)) * h(k, j);
            g(i, j) = s;
            g(j, i) = std::conj(s);
        }
        g(j, j) = g(j, j).real();
    }
    return g;
}

/// m x n matrix of independent CN(0, 1/n) entries via Box-Muller.
inline CMatrix sample_channel(Philox4x32& gen, int n, int m) {
    if (n < 1 || m < 1) throw DomainError("sample_channel: dimensions must be positive");
    CMatrix h(m, n);
    const double sd = std::sqrt(0.5 / n);
    for (auto& z : h.data) {
        const double rad = std::sqrt(-2.0 * std::log(gen.uniform()));
        const double ang = 2.0 * std::numbers::pi * gen.uniform();
        z = cplx(sd * rad * std::cos(ang), sd * rad * std::sin(ang));
    }
    return h;
}

/// log det(I + rho H^H H) via a Cholesky factorization.
inline double mutual_information(const CMatrix& h, double rho) {
    CMatrix a = gram(h);
    const int n = a.rows;
    for (auto& z : a.data) z *= rho;
    for (int i = 0; i < n; ++i) a(i, i) += 1.0;
    double logdet = 0.0;
    // in-place lower factor, column by column
    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(a(j, k));
        if (!(d > 0.0)) throw ConvergenceError("mutual_information: Cholesky breakdown", d);
        const double l = std::sqrt(d);
        a(j, j) = l;
        logdet += 2.0 * std::log(l);
        for (int i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * std::conj(a(j, k));
            a(i, j) = s / l;
        }
    }
    return logdet;
}

inline constexpr int kMaxJacobiSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-12;

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations, ascending.
inline std::vector<double> hermitian_eigenvalues(CMatrix a) {
    if (a.rows != a.cols) throw DomainError("hermitian_eigenvalues: matrix must be square");
    const int n = a.rows;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const cplx s = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = s;
            a(j, i) = std::conj(s);
        }
        a(j, j) = a(j, j).real();
    }
    for (const auto& z : a.data) total += std::norm(z);
    const double target = kJacobiTolerance * std::sqrt(total);

    auto off_norm = [&] {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > target) {
        if (++sweep > kMaxJacobiSweeps) {
            throw ConvergenceError("hermitian_eigenvalues: sweep limit reached", off_norm());
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0.0) continue;
                const cplx phase = a(p, q) / mag;  // e^{i phi}
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = t * c;
                const cplx ph_c = std::conj(phase);
                // A <- A U with U_pp = c, U_pq = s, U_qp = -s e^{-i phi}, U_qq = c e^{-i phi}
                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * ph_c * akq;
                    a(k, q) = s * akp + c * ph_c * akq;
                }
                // A <- U^H A
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * phase * aqk;
                    a(q, k) = s * apk + c * phase * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

struct McConfig {
    int n = 1;
    int m = 1;
    double rho = 1.0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    int streams = 1;
    int jobs = 1;  // worker threads; results do not depend on it
};

inline void validate(const McConfig& cfg) {
    if (cfg.n < 1 || cfg.m < cfg.n) throw DomainError("McConfig: requires m >= n >= 1");
    if (!(cfg.rho > 0.0)) throw DomainError("McConfig: rho must be positive");
    if (cfg.trials < 1) throw DomainError("McConfig: trials must be >= 1");
    if (cfg.streams < 1) throw DomainError("McConfig: streams must be >= 1");
    if (cfg.jobs < 1) throw DomainError("McConfig: jobs must be >= 1");
}

/// Sampled mutual informations and conditioned eigenvalue pools.
///
/// All stores are kept sorted so that merging is associative and commutative.
struct McAccumulator {
    std::uint64_t count = 0;
    std::vector<double> info;                 // I_N per trial, ascending
    std::vector<double> thresholds;           // conditioning thresholds on I_N (= N r)
    std::vector<std::uint64_t> accepted;      // trials with I_N <= threshold
    std::vector<std::vector<double>> eigen;   // pooled eigenvalues per threshold, ascending
    std::uint64_t seed = 0;
    std::vector<int> streams;                 // stream ids merged into this accumulator, ascending

    McAccumulator() = default;
    explicit McAccumulator(std::vector<double> thr)
        : thresholds(std::move(thr)), accepted(thresholds.size(), 0), eigen(thresholds.size()) {}

    void merge(const McAccumulator& other) {
        if (other.thresholds != thresholds) {
            throw DomainError("McAccumulator::merge: threshold sets differ");
        }
        if (!streams.empty() && !other.streams.empty() && other.seed != seed) {
            throw DomainError("McAccumulator::merge: accumulators come from different seeds");
        }
        if (streams.empty()) seed = other.seed;
        count += other.count;
        info = merged(info, other.info);
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            accepted[i] += other.accepted[i];
            eigen[i] = merged(eigen[i], other.eigen[i]);
        }
        std::vector<int> ids;
        std::merge(streams.begin(), streams.end(), other.streams.begin(), other.streams.end(),
                   std::back_inserter(ids));
        streams = std::move(ids);
    }

private:
    static std::vector<double> merged(const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> out;
        out.reserve(x.size() + y.size());
        std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
        return out;
    }
};

/// Trials assigned to one stream: an even split with the remainder on the first streams.
inline std::uint64_t stream_trials(const McConfig& cfg, int stream) {
    const std::uint64_t base = cfg.trials / std::uint64_t(cfg.streams);
    const std::uint64_t extra = cfg.trials % std::uint64_t(cfg.streams);
    return base + (std::uint64_t(stream) < extra ? 1 : 0);
}

inline McAccumulator run_stream(const McConfig& cfg, int stream, const std::vector<double>& thresholds) {
    McAccumulator acc(thresholds);
    acc.seed = cfg.seed;
    acc.streams = {stream};
    auto gen = Philox4x32::for_stream(cfg.seed, std::uint64_t(stream));
    const std::uint64_t t = stream_trials(cfg, stream);
    acc.info.reserve(t);
    const double top = thresholds.empty() ? -1.0 : *std::max_element(thresholds.begin(), thresholds.end());
    for (std::uint64_t i = 0; i < t; ++i) {
        const CMatrix h = sample_channel(gen, cfg.n, cfg.m);
        const double mi = mutual_information(h, cfg.rho);
        acc.info.push_back(mi);
        if (mi <= top) {
            const auto ev = hermitian_eigenvalues(gram(h));
            for (std::size_t j = 0; j < thresholds.size(); ++j) {
                if (mi <= thresholds[j]) {
                    ++acc.accepted[j];
                    acc.eigen[j].insert(acc.eigen[j].end(), ev.begin(), ev.end());
                }
            }
        }
    }
    acc.count = t;
    std::sort(acc.info.begin(), acc.info.end());
    for (auto& pool : acc.eigen) std::sort(pool.begin(), pool.end());
    return acc;
}

/// Runs every stream on a pool of cfg.jobs threads and merges in stream order.
inline McAccumulator simulate(const McConfig& cfg, const std::vector<double>& thresholds = {}) {
    validate(cfg);
    std::vector<McAccumulator> parts(cfg.streams);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int s = next++; s < cfg.streams; s = next++) parts[s] = run_stream(cfg, s, thresholds);
    };
    const int workers = std::min(cfg.jobs, cfg.streams);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    McAccumulator total(thresholds);
    total.seed = cfg.seed;
    for (const auto& p : parts) total.merge(p);
    return total;
}

/// Fraction of trials with I_N <= N r and its binomial standard error.
inline OutageResult outage_from(const McAccumulator& acc, int n, int m, double rho, double r) {
    OutageResult out{n, m, rho, r};
    out.method = Method::MC;
    const auto hits = std::upper_bound(acc.info.begin(), acc.info.end(), n * r) - acc.info.begin();
    const double total = double(acc.count);
    const double p = total > 0 ? double(hits) / total : 0.0;
    out.p_out = p;
    out.log10_p_out = p > 0.0 ? std::log10(p) : -std::numeric_limits<double>::infinity();
    out.std_error = total > 0 ? std::sqrt(p * (1.0 - p) / total) : 0.0;
    return out;
}

inline std::vector<OutageResult> empirical_outage(const McConfig& cfg, const std::vector<double>& r_grid) {
    const auto acc = simulate(cfg);
    std::vector<OutageResult> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) out.push_back(outage_from(acc, cfg.n, cfg.m, cfg.rho, r));
    return out;
}

/// Pooled eigenvalues of H^H H over trials with I_N <= N r.
struct ConditionedSample {
    std::vector<double> eigenvalues;  // ascending; the empirical CDF support
    std::uint64_t accepted = 0;
    std::uint64_t trials = 0;
    double acceptance_rate() const { return trials ? double(accepted) / double(trials) : 0.0; }

    double cdf(double x) const {
        if (eigenvalues.empty()) return 0.0;
        const auto k = std::upper_bound(eigenvalues.begin(), eigenvalues.end(), x) - eigenvalues.begin();
        return double(k) / double(eigenvalues.size());
    }
};

inline constexpr std::uint64_t kMinAcceptedTrials = 100;

inline ConditionedSample conditioned_spectrum(const McConfig& cfg, double r) {
    const auto acc = simulate(cfg, {cfg.n * r});
    if (acc.accepted[0] < kMinAcceptedTrials) {
        throw InsufficientAcceptance("conditioned_spectrum: only " + std::to_string(acc.accepted[0]) +
                                     " trials accepted");
    }
    return {acc.eigen[0], acc.accepted[0], acc.count};
}

}  // namespace ldmimo
