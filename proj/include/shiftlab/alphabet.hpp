#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace shiftlab {

// One level of a discrete outcome: a token plus the real value it codes for.
struct OutcomeLevel {
    std::string label;
    double value = 0.0;
};

// Finite alphabet for (X, Y1, Y2). Labels are unique per axis, every axis
// has at least one level, and outcome values are finite.
class Alphabet {
public:
    Alphabet(std::vector<std::string> x_labels,
             std::vector<OutcomeLevel> y1_levels,
             std::vector<OutcomeLevel> y2_levels);

    std::size_t n_x() const { return x_labels_.size(); }
    std::size_t n_y1() const { return y1_levels_.size(); }
    std::size_t n_y2() const { return y2_levels_.size(); }
    std::size_t n_cells() const { return n_y1() * n_y2(); }

    const std::string& x_label(std::size_t i) const { return x_labels_[i]; }
    const std::vector<std::string>& x_labels() const { return x_labels_; }
    const OutcomeLevel& y1_level(std::size_t i) const { return y1_levels_[i]; }
    const OutcomeLevel& y2_level(std::size_t i) const { return y2_levels_[i]; }
    const std::vector<OutcomeLevel>& y1_levels() const { return y1_levels_; }
    const std::vector<OutcomeLevel>& y2_levels() const { return y2_levels_; }
    double y1_value(std::size_t i) const { return y1_levels_[i].value; }
    double y2_value(std::size_t i) const { return y2_levels_[i].value; }

    std::optional<std::size_t> x_index(const std::string& label) const;
    std::optional<std::size_t> y1_index(const std::string& label) const;
    std::optional<std::size_t> y2_index(const std::string& label) const;

    bool operator==(const Alphabet& other) const;

private:
    std::vector<std::string> x_labels_;
    std::vector<OutcomeLevel> y1_levels_;
    std::vector<OutcomeLevel> y2_levels_;
    std::unordered_map<std::string, std::size_t> x_lookup_;
    std::unordered_map<std::string, std::size_t> y1_lookup_;
    std::unordered_map<std::string, std::size_t> y2_lookup_;
};

}  // namespace shiftlab
