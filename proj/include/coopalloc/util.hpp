#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace coopalloc {

// Dense linear solve (Gaussian elimination, partial pivoting).
// Returns false when the system is singular to working precision.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& out);

// Exact small linear program by basic-solution enumeration:
//   min c.x  s.t.  Aeq x = beq,  Aub x <= bub,  x >= 0.
// Intended for a handful of variables; cost grows combinatorially.
struct MiniLp {
    std::vector<double> c;
    std::vector<std::vector<double>> a_eq;
    std::vector<double> b_eq;
    std::vector<std::vector<double>> a_ub;
    std::vector<double> b_ub;

    struct Result {
        bool feasible = false;
        double objective = 0.0;
        std::vector<double> x;
    };
    Result solve(double tol = 1e-9) const;
};

// Run fn(k) for k in [0, count) across up to `threads` workers, chunked by
// index so the work split is deterministic. fn must not throw.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

// SplitMix64 with a keyed substream construction: distinct (seed, stream)
// pairs give independent deterministic sequences.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 0x632BE59BD9B4E019ULL));
        next();  // decorrelate nearby streams
    }
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // Standard exponential.
    double exponential();

private:
    std::uint64_t state_;
};

}  // namespace coopalloc
