#pragma once

#include <vector>

#include "shiftlab/estimators.hpp"
#include "shiftlab/joint.hpp"

namespace shiftlab {

// Alphabet for an outcome chain Y_1..Y_T over a shared covariate axis.
class MultiAlphabet {
public:
    MultiAlphabet(std::vector<std::string> x_labels,
                  std::vector<std::vector<OutcomeLevel>> outcome_axes);

    std::size_t n_x() const { return x_labels_.size(); }
    std::size_t horizon() const { return axes_.size(); }  // T
    const std::vector<std::string>& x_labels() const { return x_labels_; }
    const std::vector<OutcomeLevel>& axis(std::size_t t) const { return axes_[t - 1]; }  // 1-based
    std::size_t axis_size(std::size_t t) const { return axes_[t - 1].size(); }

    bool operator==(const MultiAlphabet& other) const;

private:
    std::vector<std::string> x_labels_;
    std::vector<std::vector<OutcomeLevel>> axes_;
};

// The joint observed in period -t: P(y_1..y_t | x) with the x-marginal.
// Cells are flattened row-major with y_1 slowest.
class PeriodJoint {
public:
    static PeriodJoint create(MultiAlphabet alphabet, std::size_t t, std::vector<double> px,
                              std::vector<double> table);

    const MultiAlphabet& alphabet() const { return alphabet_; }
    std::size_t t() const { return t_; }
    std::size_t n_cells() const { return cells_; }
    double px(std::size_t xi) const { return px_[xi]; }
    const double* row(std::size_t xi) const { return table_.data() + xi * cells_; }

private:
    PeriodJoint(MultiAlphabet alphabet, std::size_t t, std::vector<double> px,
                std::vector<double> table);

    MultiAlphabet alphabet_;
    std::size_t t_;
    std::size_t cells_;
    std::vector<double> px_;
    std::vector<double> table_;
};

// Nested multi-period predictor: the innermost conditional mean of Y_{t2}
// given (Y_{t1}..Y_{t2-1}, x) under period -t2, successively averaged under
// periods -t2+1 .. -t1. joints[k] holds the period -(k+1) joint. Reduces to
// tau_C for (t1,t2) = (1,2). Zero-support cells fall back to the defining
// period's x-level mean, flagging the x, exactly as in tau_C.
TauCResult tau_nested(const std::vector<PeriodJoint>& joints, std::size_t t1, std::size_t t2);

// Bridges for the two-outcome case.
MultiAlphabet to_multi_alphabet(const Alphabet& alphabet);
PeriodJoint period_joint_from_conditional(const ConditionalJoint& joint, std::size_t t);

}  // namespace shiftlab
