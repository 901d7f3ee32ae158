// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/multirate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ckfree {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

void require_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

Filter Filter::line(std::vector<double> t) {
    Filter f;
    f.rows = 1;
    f.cols = static_cast<int>(t.size());
    f.taps = std::move(t);
    f.validate();
    return f;
}

Filter Filter::grid(int rows, int cols, std::vector<double> t) {
    require(rows >= 1 && cols >= 1, "Filter::grid: rows and cols must be positive");
    require(static_cast<std::size_t>(rows) * cols == t.size(),
            "Filter::grid: taps size does not match rows*cols");
    Filter f;
    f.rows = rows;
    f.cols = cols;
    f.taps = std::move(t);
    f.validate();
    return f;
}

void Filter::validate() const {
    require(rows >= 1 && cols >= 1, "Filter: empty tap grid");
    require(static_cast<std::size_t>(rows) * cols == taps.size(),
            "Filter: taps size does not match rows*cols");
    for (double t : taps)
        require(std::isfinite(t), "Filter: non-finite tap");
}

double dc_value(const Filter& h) {
    double s = 0.0;
    for (double t : h.taps) s += t;
    return s;
}

Filter zero_order_hold_kernel(int factor, int dims) {
    require_arg(factor >= 1, "zero_order_hold_kernel: factor must be >= 1");
    require_arg(dims == 1 || dims == 2, "zero_order_hold_kernel: dims must be 1 or 2");
    if (dims == 1) return Filter::line(std::vector<double>(factor, 1.0));
    return Filter::grid(factor, factor, std::vector<double>(static_cast<std::size_t>(factor) * factor, 1.0));
}

PolyphaseSet polyphase_decompose(const Filter& h, int factor) {
    h.validate();
    require_arg(factor >= 2, "polyphase_decompose: factor must be >= 2");
    const int U = factor;

    PolyphaseSet set;
    set.factor = U;
    set.dims = h.one_dimensional() ? 1 : 2;

    if (set.dims == 1) {
        // Component i (1-based) collects taps at lags congruent to U-i mod U,
        // so a tap at lag k with residue r = k mod U lands in component U-r
        // (component U when r == 0) at position floor(k/U).
        const int L = ceil_div(h.cols, U);
        set.components.assign(U, Filter::line(std::vector<double>(L, 0.0)));
        for (int k = 0; k < h.cols; ++k) {
            const int r = k % U;
            const int i = (r == 0) ? U : U - r;
            set.components[i - 1].taps[k / U] = h.taps[k];
        }
    } else {
        const int Lr = ceil_div(h.rows, U);
        const int Lc = ceil_div(h.cols, U);
        set.components.assign(static_cast<std::size_t>(U) * U,
                              Filter::grid(Lr, Lc, std::vector<double>(
                                                       static_cast<std::size_t>(Lr) * Lc, 0.0)));
        for (int ky = 0; ky < h.rows; ++ky) {
            const int rr = ky % U;
            const int ir = (rr == 0) ? U : U - rr;
            for (int kx = 0; kx < h.cols; ++kx) {
                const int rc = kx % U;
                const int ic = (rc == 0) ? U : U - rc;
                set.components[static_cast<std::size_t>(ir - 1) * U + (ic - 1)].at(ky / U, kx / U) =
                    h.at(ky, kx);
            }
        }
    }

    set.dc.reserve(set.components.size());
    for (const Filter& c : set.components) set.dc.push_back(dc_value(c));
    return set;
}

Filter polyphase_recompose(const PolyphaseSet& set) {
    const int U = set.factor;
    require(U >= 1, "polyphase_recompose: factor must be >= 1");
    require(set.dims == 1 || set.dims == 2, "polyphase_recompose: dims must be 1 or 2");
    const std::size_t want = set.dims == 1 ? static_cast<std::size_t>(U)
                                           : static_cast<std::size_t>(U) * U;
    require(set.components.size() == want, "polyphase_recompose: wrong component count");
    for (const Filter& c : set.components) {
        c.validate();
        require(c.rows == set.components[0].rows && c.cols == set.components[0].cols,
                "polyphase_recompose: components disagree on length");
    }

    if (set.dims == 1) {
        const int L = set.components[0].cols;
        std::vector<double> taps(static_cast<std::size_t>(L) * U, 0.0);
        for (int i = 1; i <= U; ++i)
            for (int j = 0; j < L; ++j)
                taps[static_cast<std::size_t>(j) * U + (U - i) % U] = set.components[i - 1].taps[j];
        // Undo the zero padding that decomposition added at the tail.
        int n = static_cast<int>(taps.size());
        while (n > 1 && taps[n - 1] == 0.0) --n;
        taps.resize(n);
        return Filter::line(std::move(taps));
    }

    const int Lr = set.components[0].rows;
    const int Lc = set.components[0].cols;
    const int R = Lr * U;
    const int C = Lc * U;
    Filter full = Filter::grid(R, C, std::vector<double>(static_cast<std::size_t>(R) * C, 0.0));
    for (int ir = 1; ir <= U; ++ir)
        for (int ic = 1; ic <= U; ++ic) {
            const Filter& comp = set.components[static_cast<std::size_t>(ir - 1) * U + (ic - 1)];
            for (int j = 0; j < Lr; ++j)
                for (int k = 0; k < Lc; ++k)
                    full.at(j * U + (U - ir) % U, k * U + (U - ic) % U) = comp.at(j, k);
        }
    int rows = R, cols = C;
    auto row_zero = [&](int r) {
        for (int c = 0; c < cols; ++c)
            if (full.at(r, c) != 0.0) return false;
        return true;
    };
    auto col_zero = [&](int c) {
        for (int r = 0; r < rows; ++r)
            if (full.at(r, c) != 0.0) return false;
        return true;
    };
    while (rows > 1 && row_zero(rows - 1)) --rows;
    while (cols > 1 && col_zero(cols - 1)) --cols;
    std::vector<double> taps(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) taps[static_cast<std::size_t>(r) * cols + c] = full.at(r, c);
    return Filter::grid(rows, cols, std::move(taps));
}

AvoidanceReport satisfies_avoidance_condition(const Filter& h, int factor, double tol) {
    require_arg(factor >= 2, "satisfies_avoidance_condition: factor must be >= 2");
    require_arg(tol >= 0.0, "satisfies_avoidance_condition: tol must be >= 0");
    PolyphaseSet set = polyphase_decompose(h, factor);
    AvoidanceReport rep;
    rep.phase_dc = set.dc;
    rep.tol = tol;
    for (double d : set.dc) rep.mean_dc += d;
    rep.mean_dc /= static_cast<double>(set.dc.size());
    for (double d : set.dc) rep.max_deviation = std::max(rep.max_deviation, std::abs(d - rep.mean_dc));
    rep.pass = rep.max_deviation <= tol;
    return rep;
}

namespace {

// Long division of a coefficient row by the length-U all-ones polynomial.
// The divisor's leading coefficient is 1, so the quotient falls out without
// any divides; the caller detects failure from the reconstruction error.
std::vector<double> divide_by_ones(const std::vector<double>& num, int U) {
    const int n = static_cast<int>(num.size());
    const int nq = n - U + 1;
    std::vector<double> rem = num;
    std::vector<double> q(static_cast<std::size_t>(nq), 0.0);
    for (int k = nq - 1; k >= 0; --k) {
        q[k] = rem[k + U - 1];
        for (int j = 0; j < U; ++j) rem[k + j] -= q[k];
    }
    return q;
}

}  // namespace

H0Factorization factor_out_h0(const Filter& h, int factor, double tol) {
    h.validate();
    require_arg(factor >= 2, "factor_out_h0: factor must be >= 2");
    const int U = factor;

    H0Factorization out;
    const int dims = h.one_dimensional() ? 1 : 2;
    if (h.cols < U || (dims == 2 && h.rows < U)) {
        // Too short to contain the hold kernel at all.
        for (double t : h.taps) out.max_remainder = std::max(out.max_remainder, std::abs(t));
        out.exact = out.max_remainder <= tol;
        out.quotient = dims == 1 ? Filter::line({0.0}) : Filter::grid(1, 1, {0.0});
        return out;
    }

    Filter q;
    if (dims == 1) {
        q = Filter::line(divide_by_ones(h.taps, U));
    } else {
        // Separable division: strip the hold kernel from every row, then from
        // every column of the partial quotient.
        const int qc = h.cols - U + 1;
        const int qr = h.rows - U + 1;
        std::vector<double> part(static_cast<std::size_t>(h.rows) * qc);
        for (int r = 0; r < h.rows; ++r) {
            std::vector<double> row(h.taps.begin() + static_cast<std::size_t>(r) * h.cols,
                                    h.taps.begin() + static_cast<std::size_t>(r + 1) * h.cols);
            std::vector<double> qrow = divide_by_ones(row, U);
            std::copy(qrow.begin(), qrow.end(), part.begin() + static_cast<std::size_t>(r) * qc);
        }
        std::vector<double> taps(static_cast<std::size_t>(qr) * qc);
        for (int c = 0; c < qc; ++c) {
            std::vector<double> col(h.rows);
            for (int r = 0; r < h.rows; ++r) col[r] = part[static_cast<std::size_t>(r) * qc + c];
            std::vector<double> qcol = divide_by_ones(col, U);
            for (int r = 0; r < qr; ++r) taps[static_cast<std::size_t>(r) * qc + c] = qcol[r];
        }
        q = Filter::grid(qr, qc, std::move(taps));
    }

    // Judge exactness by how well P * H0 rebuilds h; this also covers the
    // rows that the separable pass could not cancel.
    Filter rec = convolve(q, zero_order_hold_kernel(U, dims));
    require(rec.rows == h.rows && rec.cols == h.cols, "factor_out_h0: internal size mismatch");
    for (std::size_t i = 0; i < h.taps.size(); ++i)
        out.max_remainder = std::max(out.max_remainder, std::abs(h.taps[i] - rec.taps[i]));
    out.exact = out.max_remainder <= tol;
    out.quotient = std::move(q);
    return out;
}

Filter convolve(const Filter& a, const Filter& b) {
    a.validate();
    b.validate();
    // A 1-D filter is a single-row grid, so mixed-rank operands are fine;
    // the result collapses back to 1-D only when both inputs are single-row.
    const int R = a.rows + b.rows - 1;
    const int C = a.cols + b.cols - 1;
    std::vector<double> taps(static_cast<std::size_t>(R) * C, 0.0);
    for (int ar = 0; ar < a.rows; ++ar)
        for (int ac = 0; ac < a.cols; ++ac) {
            const double av = a.at(ar, ac);
            for (int br = 0; br < b.rows; ++br)
                for (int bc = 0; bc < b.cols; ++bc)
                    taps[static_cast<std::size_t>(ar + br) * C + (ac + bc)] += av * b.at(br, bc);
        }
    if (R == 1) return Filter::line(std::move(taps));
    return Filter::grid(R, C, std::move(taps));
}

std::vector<double> interpolate_zero_insert(const std::vector<double>& x, const Filter& h,
                                            int factor) {
    h.validate();
    require(h.one_dimensional(), "interpolate_zero_insert: 1-D filters only");
    require_arg(factor >= 1, "interpolate_zero_insert: factor must be >= 1");
    require(!x.empty(), "interpolate_zero_insert: empty input");
    const int U = factor;
    const int N = static_cast<int>(x.size());
    std::vector<double> y(static_cast<std::size_t>(U) * (N - 1) + h.cols, 0.0);
    // Scatter form: each input sample pushes a copy of the kernel into the
    // output. Equivalent to zero insertion followed by full convolution.
    for (int m = 0; m < N; ++m)
        for (int k = 0; k < h.cols; ++k) y[static_cast<std::size_t>(U) * m + k] += x[m] * h.taps[k];
    return y;
}

std::vector<double> interpolate_polyphase(const std::vector<double>& x, const PolyphaseSet& set) {
    const int U = set.factor;
    require(U >= 1 && set.dims == 1, "interpolate_polyphase: 1-D sets only");
    require(set.components.size() == static_cast<std::size_t>(U),
            "interpolate_polyphase: wrong component count");
    require(!x.empty(), "interpolate_polyphase: empty input");
    const int N = static_cast<int>(x.size());
    const int L = set.components[0].cols;
    // One full row of phases per input step; the last up-to-U-1 entries are
    // padding zeros whenever len(h) is not a multiple of U.
    std::vector<double> y(static_cast<std::size_t>(U) * (N - 1) + static_cast<std::size_t>(U) * L,
                          0.0);
    for (std::size_t n = 0; n < y.size(); ++n) {
        const int s = static_cast<int>(n % U);
        const int qpos = static_cast<int>(n / U);
        // Output residue s is served by component U-s (1-based), whose taps
        // are h[U*j + s].
        const Filter& comp = set.components[U - 1 - s];
        double acc = 0.0;
        // Walk taps high-to-low so input samples are visited in ascending
        // order; this matches the scatter form's accumulation order exactly.
        for (int j = L - 1; j >= 0; --j) {
            const int m = qpos - j;
            if (m < 0 || m >= N) continue;
            acc += comp.taps[j] * x[m];
        }
        y[n] = acc;
    }
    return y;
}

}  // namespace ckfree
