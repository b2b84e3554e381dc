#pragma once

// A set of nested, telescoping tubes described by their overall lengths.
// Index 0 is the outermost (shortest) tube; lengths increase strictly
// toward the innermost tube. Translations beta_i <= 0 retract tube i into
// the actuation unit, and a configuration is feasible when both chains
//
//   0 >= beta_1 >= beta_2 >= ... >= beta_N          (nesting order)
//   0 <= L_1 + beta_1 <= ... <= L_N + beta_N        (deployed length order)
//
// hold. Optional per-tube safety margins shrink the feasible box so the
// chains keep a guaranteed slack.

#include <cstddef>
#include <string>
#include <vector>

#include <betabox/errors.hpp>

namespace betabox {

class TubeSet {
  public:
    // margins may be empty (treated as all zero) or one entry per tube.
    explicit TubeSet(std::vector<double> lengths, std::vector<double> margins = {})
        : lengths_(std::move(lengths)), margins_(std::move(margins)) {
        if (lengths_.empty())
            throw NonIncreasingLengths("tube set needs at least one tube");
        if (margins_.empty())
            margins_.assign(lengths_.size(), 0.0);
        if (margins_.size() != lengths_.size())
            throw DimensionMismatch("margin count " + std::to_string(margins_.size()) +
                                    " does not match tube count " + std::to_string(lengths_.size()));
        double prev = 0.0;
        for (std::size_t i = 0; i < lengths_.size(); ++i) {
            if (!(lengths_[i] > prev))
                throw NonIncreasingLengths("tube lengths must be positive and strictly increasing, offender at index " +
                                           std::to_string(i));
            if (margins_[i] < 0.0)
                throw InvalidConfiguration("margins must be nonnegative, offender at index " + std::to_string(i));
            prev = lengths_[i];
        }
    }

    std::size_t size() const { return lengths_.size(); }
    const std::vector<double>& lengths() const { return lengths_; }
    const std::vector<double>& margins() const { return margins_; }
    double length(std::size_t i) const { return lengths_[i]; }

    // Substitutes margin-reduced lengths L*_i = L_i - sum_{k >= i} m_k and
    // returns the reduced set (margins cleared, they are spent). Because
    // L*_i - L*_{i-1} = (L_i - L_{i-1}) + m_{i-1}, the reduced lengths stay
    // strictly increasing; only L*_1 can go nonpositive.
    TubeSet with_margins() const {
        std::vector<double> reduced(lengths_.size());
        double tail = 0.0;
        for (std::size_t i = lengths_.size(); i-- > 0;) {
            tail += margins_[i];
            reduced[i] = lengths_[i] - tail;
        }
        if (reduced.front() <= 0.0)
            throw NonPositiveEffectiveLength("margins leave no usable length on the outermost tube");
        return TubeSet(std::move(reduced));
    }

  private:
    std::vector<double> lengths_;
    std::vector<double> margins_;
};

// Convenience overload used where margins arrive separately from the set.
inline TubeSet apply_margins(const TubeSet& tubes, const std::vector<double>& margins) {
    return TubeSet(tubes.lengths(), margins).with_margins();
}

}  // namespace betabox
