#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "structboost/types.hpp"

namespace structboost::lp {

// min c'x  s.t.  a_r'x >= b_r for every row,  0 <= x <= upper (default +inf).
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> row_coeffs;
    std::vector<double> row_rhs;
    std::vector<double> upper;  // empty means all +inf

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(row_rhs.size()); }

    void add_row(std::vector<double> a, double b) {
        row_coeffs.push_back(std::move(a));
        row_rhs.push_back(b);
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    std::vector<double> primal;
    std::vector<double> duals;          // one per constraint row, >= 0
    std::vector<double> reduced_costs;  // one per variable
    double objective_value = 0.0;
};

// plain-text tableau dump, exposed behind a CLI flag
inline void dump(const LinearProgram& lp, std::ostream& os) {
    os << "vars " << lp.num_vars() << " rows " << lp.num_rows() << "\n";
    os << "min";
    for (double c : lp.objective) os << ' ' << c;
    os << "\n";
    for (int r = 0; r < lp.num_rows(); ++r) {
        for (double a : lp.row_coeffs[r]) os << a << ' ';
        os << ">= " << lp.row_rhs[r] << "\n";
    }
    if (!lp.upper.empty()) {
        os << "ub";
        for (double u : lp.upper) os << ' ' << u;
        os << "\n";
    }
}

namespace detail {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr int kDegenerateLimit = 60;

enum class VarState { basic, at_lower, at_upper };

// Two-phase primal simplex with bounded variables and a dense basis inverse.
// Variable layout: structural | surplus (one per row, coefficient -1) |
// artificial (rows with positive rhs only). Dantzig pricing until a
// degeneracy streak trips, Bland's rule afterwards.
class Simplex {
public:
    explicit Simplex(const LinearProgram& in) : lp_(in), n_(in.num_vars()), m_(in.num_rows()) {
        for (int r = 0; r < m_; ++r)
            if (static_cast<int>(lp_.row_coeffs[r].size()) != n_)
                throw InvalidInputError("lp: row dimension mismatch");
        for (double c : lp_.objective)
            if (!std::isfinite(c)) throw InvalidInputError("lp: non-finite objective");
        for (const auto& row : lp_.row_coeffs)
            for (double a : row)
                if (!std::isfinite(a)) throw InvalidInputError("lp: non-finite coefficient");
        if (n_ == 0) throw InvalidInputError("lp: at least one variable required");

        for (int r = 0; r < m_; ++r)
            if (lp_.row_rhs[r] > 0.0) artificials_.push_back(r);

        total_ = n_ + m_ + static_cast<int>(artificials_.size());
        upper_.assign(total_, std::numeric_limits<double>::infinity());
        if (!lp_.upper.empty())
            for (int j = 0; j < n_; ++j) upper_[j] = lp_.upper[j];
        state_.assign(total_, VarState::at_lower);
        value_.assign(total_, 0.0);
        basis_.assign(m_, -1);
        binv_.assign(m_, std::vector<double>(m_, 0.0));

        int next_art = n_ + m_;
        for (int r = 0; r < m_; ++r) {
            if (lp_.row_rhs[r] <= 0.0) {
                // a'x - s = b with x = 0 gives s = -b >= 0: surplus is basic
                basis_[r] = n_ + r;
                binv_[r][r] = -1.0;
                state_[n_ + r] = VarState::basic;
                value_[n_ + r] = -lp_.row_rhs[r];
            } else {
                basis_[r] = next_art++;
                binv_[r][r] = 1.0;
                state_[basis_[r]] = VarState::basic;
                value_[basis_[r]] = lp_.row_rhs[r];
            }
        }
    }

    LpSolution solve() {
        LpSolution out;
        if (!artificials_.empty()) {
            cost_.assign(total_, 0.0);
            for (int j = n_ + m_; j < total_; ++j) cost_[j] = 1.0;
            phase1_ = true;
            bland_ = false;
            degenerate_streak_ = 0;
            if (!iterate()) throw SolverFailure("lp: phase-1 reported unbounded");
            if (current_objective() > 1e-8) {
                out.status = LpStatus::infeasible;
                return out;
            }
            // artificials may linger in the basis at zero; pin them there
            for (int j = n_ + m_; j < total_; ++j) upper_[j] = 0.0;
        }

        cost_.assign(total_, 0.0);
        for (int j = 0; j < n_; ++j) cost_[j] = lp_.objective[j];
        phase1_ = false;
        bland_ = false;
        degenerate_streak_ = 0;
        if (!iterate()) {
            out.status = LpStatus::unbounded;
            return out;
        }

        refresh_basics();
        out.status = LpStatus::optimal;
        out.primal.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) out.primal[j] = std::max(0.0, value_[j]);
        std::vector<double> y = basis_multipliers();
        out.duals.assign(m_, 0.0);
        for (int r = 0; r < m_; ++r) out.duals[r] = std::max(0.0, y[r]);
        out.reduced_costs.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j)
            if (state_[j] != VarState::basic) out.reduced_costs[j] = reduced_cost(j, y);
        out.objective_value = 0.0;
        for (int j = 0; j < n_; ++j) out.objective_value += lp_.objective[j] * out.primal[j];
        verify(out, y);
        return out;
    }

private:
    // column entry of the equality system  A x - s + t = b  for variable j
    double coeff(int r, int j) const {
        if (j < n_) return lp_.row_coeffs[r][j];
        if (j < n_ + m_) return (j - n_ == r) ? -1.0 : 0.0;
        return artificials_[j - n_ - m_] == r ? 1.0 : 0.0;
    }

    bool is_artificial(int j) const { return j >= n_ + m_; }

    std::vector<double> basis_multipliers() const {
        std::vector<double> y(m_, 0.0);
        for (int r = 0; r < m_; ++r) {
            double acc = 0.0;
            for (int k = 0; k < m_; ++k) acc += cost_[basis_[k]] * binv_[k][r];
            y[r] = acc;
        }
        return y;
    }

    double reduced_cost(int j, const std::vector<double>& y) const {
        double d = cost_[j];
        if (j < n_) {
            for (int r = 0; r < m_; ++r)
                if (lp_.row_coeffs[r][j] != 0.0) d -= y[r] * lp_.row_coeffs[r][j];
        } else if (j < n_ + m_) {
            d += y[j - n_];
        } else {
            d -= y[artificials_[j - n_ - m_]];
        }
        return d;
    }

    double current_objective() const {
        double obj = 0.0;
        for (int j = 0; j < total_; ++j)
            if (cost_[j] != 0.0) obj += cost_[j] * value_[j];
        return obj;
    }

    void refresh_basics() {
        std::vector<double> rhs(lp_.row_rhs);
        for (int j = 0; j < total_; ++j) {
            if (state_[j] == VarState::at_upper) {
                value_[j] = upper_[j];
                if (upper_[j] != 0.0)
                    for (int r = 0; r < m_; ++r) rhs[r] -= coeff(r, j) * upper_[j];
            } else if (state_[j] == VarState::at_lower) {
                value_[j] = 0.0;
            }
        }
        for (int r = 0; r < m_; ++r) {
            double acc = 0.0;
            for (int k = 0; k < m_; ++k) acc += binv_[r][k] * rhs[k];
            value_[basis_[r]] = acc < 0.0 && acc > -1e-11 ? 0.0 : acc;
        }
    }

    // one simplex phase; returns false when an unbounded direction is found
    bool iterate() {
        const long max_iters = 2000L + 400L * (m_ + 16) + 8L * total_;
        for (long iter = 0; iter < max_iters; ++iter) {
            if (iter > 0 && iter % 256 == 0) refresh_basics();
            std::vector<double> y = basis_multipliers();

            int enter = -1;
            double best_violation = 0.0;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == VarState::basic) continue;
                if (!phase1_ && is_artificial(j)) continue;
                if (upper_[j] == 0.0) continue;  // pinned
                double d = reduced_cost(j, y);
                double viol = 0.0;
                if (state_[j] == VarState::at_lower && d < -kCostTol) viol = -d;
                if (state_[j] == VarState::at_upper && d > kCostTol) viol = d;
                if (viol <= 0.0) continue;
                if (bland_) {
                    enter = j;
                    break;
                }
                if (viol > best_violation) {
                    best_violation = viol;
                    enter = j;
                }
            }
            if (enter < 0) return true;  // optimal for this phase

            const bool increasing = state_[enter] == VarState::at_lower;
            std::vector<double> w(m_, 0.0);
            for (int r = 0; r < m_; ++r) {
                double acc = 0.0;
                for (int k = 0; k < m_; ++k) {
                    double a = coeff(k, enter);
                    if (a != 0.0) acc += binv_[r][k] * a;
                }
                w[r] = acc;
            }

            // ratio test over basic variables
            double best_room = std::numeric_limits<double>::infinity();
            int leave_row = -1;
            for (int r = 0; r < m_; ++r) {
                double step = increasing ? w[r] : -w[r];
                int bvar = basis_[r];
                double room;
                if (step > kPivotTol) {
                    room = value_[bvar] / step;  // basic heads to its lower bound
                } else if (step < -kPivotTol && std::isfinite(upper_[bvar])) {
                    room = (upper_[bvar] - value_[bvar]) / (-step);  // basic heads to upper
                } else {
                    continue;
                }
                if (room < 0.0) room = 0.0;
                if (room < best_room - 1e-12) {
                    best_room = room;
                    leave_row = r;
                } else if (room <= best_room + 1e-12 && leave_row >= 0 &&
                           better_leave(r, w[r], leave_row, w[leave_row])) {
                    best_room = std::min(best_room, room);
                    leave_row = r;
                }
            }

            const double flip = upper_[enter];  // +inf when unbounded above
            double before = bland_ ? 0.0 : current_objective();
            if (flip <= best_room) {
                if (!std::isfinite(flip)) return false;  // unbounded ray
                // bound flip: entering runs to its opposite bound
                for (int r = 0; r < m_; ++r)
                    shift_basic(r, (increasing ? -flip : flip) * w[r]);
                state_[enter] = increasing ? VarState::at_upper : VarState::at_lower;
                value_[enter] = increasing ? flip : 0.0;
            } else {
                if (leave_row < 0) return false;
                pivot(enter, increasing, best_room, w, leave_row);
            }
            if (!bland_) {
                double after = current_objective();
                degenerate_streak_ = (before - after < 1e-12) ? degenerate_streak_ + 1 : 0;
                if (degenerate_streak_ >= kDegenerateLimit) bland_ = true;
            }
        }
        throw SolverFailure("lp: pivot limit exceeded (numerical stall)");
    }

    bool better_leave(int row, double pivot_val, int cur_row, double cur_pivot) const {
        if (bland_) return basis_[row] < basis_[cur_row];
        if (std::abs(pivot_val) != std::abs(cur_pivot))
            return std::abs(pivot_val) > std::abs(cur_pivot);
        return basis_[row] < basis_[cur_row];
    }

    void shift_basic(int r, double delta) {
        int bvar = basis_[r];
        value_[bvar] += delta;
        if (value_[bvar] < 0.0 && value_[bvar] > -1e-11) value_[bvar] = 0.0;
    }

    void pivot(int enter, bool increasing, double delta, const std::vector<double>& w,
               int leave_row) {
        for (int r = 0; r < m_; ++r)
            if (r != leave_row) shift_basic(r, (increasing ? -delta : delta) * w[r]);

        int leave_var = basis_[leave_row];
        double step = increasing ? w[leave_row] : -w[leave_row];
        state_[leave_var] = step > 0.0 ? VarState::at_lower : VarState::at_upper;
        value_[leave_var] = step > 0.0 ? 0.0 : upper_[leave_var];

        basis_[leave_row] = enter;
        state_[enter] = VarState::basic;
        value_[enter] = increasing ? delta : upper_[enter] - delta;

        double inv = 1.0 / w[leave_row];
        for (int k = 0; k < m_; ++k) binv_[leave_row][k] *= inv;
        for (int r = 0; r < m_; ++r) {
            if (r == leave_row || w[r] == 0.0) continue;
            double factor = w[r];
            for (int k = 0; k < m_; ++k) binv_[r][k] -= factor * binv_[leave_row][k];
        }
    }

    // post-solve checks: primal feasibility, complementary slackness, strong
    // duality with bound contributions
    void verify(const LpSolution& out, const std::vector<double>& y) const {
        for (int j = 0; j < n_; ++j) {
            if (out.primal[j] < -kFeasTol) throw SolverFailure("lp: negative primal value");
            if (std::isfinite(upper_[j]) && out.primal[j] > upper_[j] + kFeasTol * (1.0 + upper_[j]))
                throw SolverFailure("lp: primal above upper bound");
        }
        double dual_obj = 0.0;
        for (int r = 0; r < m_; ++r) {
            double ax = 0.0;
            for (int j = 0; j < n_; ++j) ax += lp_.row_coeffs[r][j] * out.primal[j];
            double scale = 1.0 + std::abs(lp_.row_rhs[r]);
            if (ax < lp_.row_rhs[r] - kFeasTol * scale)
                throw SolverFailure("lp: primal infeasible at optimum");
            if (out.duals[r] * (ax - lp_.row_rhs[r]) > 1e-6 * (1.0 + out.duals[r]) * scale)
                throw SolverFailure("lp: complementary slackness violated");
            dual_obj += y[r] * lp_.row_rhs[r];
        }
        for (int j = 0; j < n_; ++j)
            if (state_[j] == VarState::at_upper) dual_obj += out.reduced_costs[j] * upper_[j];
        if (std::abs(dual_obj - out.objective_value) >
            1e-8 * (1.0 + std::abs(out.objective_value)))
            throw SolverFailure("lp: duality gap exceeds tolerance");
    }

    LinearProgram lp_;
    int n_ = 0;
    int m_ = 0;
    int total_ = 0;
    bool phase1_ = false;
    bool bland_ = false;
    int degenerate_streak_ = 0;
    std::vector<double> cost_;
    std::vector<double> upper_;
    std::vector<double> value_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    std::vector<std::vector<double>> binv_;
    std::vector<int> artificials_;  // constraint row per artificial variable
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp) {
    detail::Simplex simplex(lp);
    return simplex.solve();
}

}  // namespace structboost::lp
