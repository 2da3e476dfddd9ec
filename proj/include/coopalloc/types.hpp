#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopalloc {

// Row-major M x N matrix of doubles (M base stations, N user terminals).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw std::invalid_argument("matrix: no rows");
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw std::invalid_argument("matrix: ragged rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Tolerances used across the library. Defaults are the contract values; they
// can be overridden per call where a config struct is accepted.
struct Tolerances {
    double eq = 1e-9;        // linear constraints (budgets, spectrum sum)
    double rate_rel = 1e-7;  // nonlinear per-UE rate equality, relative
    double zero = 1e-8;      // threshold below which a power entry counts as zero
    double y_min = 1e-9;     // minimum bandwidth share of a served UE
};

// Physical-layer problem before normalization.
struct PhysicalProblem {
    std::size_t num_bs = 0;
    std::size_t num_ue = 0;
    double p0 = 0.0;               // per-BS transmit power budget [W]
    double b0 = 0.0;               // shared system bandwidth [Hz]
    double n0 = 0.0;               // noise power spectral density [W/Hz]
    Matrix channel_gain;           // |H_ij|^2, M x N
    std::vector<double> rate_demand;  // bits/s, length N

    void validate() const;
};

// Normalized problem instance: gamma(i,j) is the SNR user j would see from
// BS i at full power over the full bandwidth; rate is the demand in bit/s/Hz.
struct Instance {
    Matrix gamma;              // M x N
    std::vector<double> rate;  // length N

    std::size_t num_bs() const { return gamma.rows(); }
    std::size_t num_ue() const { return gamma.cols(); }
    void validate() const;
};

// A full allocation: power ratios x (M x N), bandwidth shares y (N),
// objective z = sum of x, and a feasibility verdict.
struct Allocation {
    Matrix x;
    std::vector<double> y;
    double z = 0.0;
    bool feasible = false;

    void recompute_z() {
        z = 0.0;
        for (double v : x.data()) z += v;
    }
};

struct EvalReport {
    std::vector<double> rate_residuals;  // delivered - required, per UE
    std::vector<double> power_slacks;    // 1 - row sum, per BS
    double spectrum_residual = 0.0;      // sum(y) - 1
    double z = 0.0;
};

}  // namespace coopalloc
