#include "shiftlab/alphabet.hpp"

#include <cmath>

#include "shiftlab/errors.hpp"

namespace shiftlab {

namespace {

template <class Seq, class LabelOf>
std::unordered_map<std::string, std::size_t> build_lookup(const Seq& seq, LabelOf label_of,
                                                          const char* axis) {
    std::unordered_map<std::string, std::size_t> lookup;
    lookup.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto [it, inserted] = lookup.emplace(label_of(seq[i]), i);
        if (!inserted) {
            throw validation_error("DuplicateLabel",
                                   std::string(axis) + " label '" + it->first + "' repeats");
        }
    }
    return lookup;
}

void check_values_finite(const std::vector<OutcomeLevel>& levels, const char* axis) {
    for (const auto& lvl : levels) {
        if (!std::isfinite(lvl.value)) {
            throw validation_error("NonFiniteValue", std::string(axis) + " level '" + lvl.label +
                                                         "' has a non-finite value");
        }
    }
}

}  // namespace

Alphabet::Alphabet(std::vector<std::string> x_labels, std::vector<OutcomeLevel> y1_levels,
                   std::vector<OutcomeLevel> y2_levels)
    : x_labels_(std::move(x_labels)),
      y1_levels_(std::move(y1_levels)),
      y2_levels_(std::move(y2_levels)) {
    if (x_labels_.empty() || y1_levels_.empty() || y2_levels_.empty()) {
        throw validation_error("EmptySupport", "every alphabet axis needs at least one level");
    }
    check_values_finite(y1_levels_, "y1");
    check_values_finite(y2_levels_, "y2");
    x_lookup_ = build_lookup(x_labels_, [](const std::string& s) { return s; }, "x");
    y1_lookup_ = build_lookup(y1_levels_, [](const OutcomeLevel& l) { return l.label; }, "y1");
    y2_lookup_ = build_lookup(y2_levels_, [](const OutcomeLevel& l) { return l.label; }, "y2");
}

std::optional<std::size_t> Alphabet::x_index(const std::string& label) const {
    auto it = x_lookup_.find(label);
    if (it == x_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Alphabet::y1_index(const std::string& label) const {
    auto it = y1_lookup_.find(label);
    if (it == y1_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Alphabet::y2_index(const std::string& label) const {
    auto it = y2_lookup_.find(label);
    if (it == y2_lookup_.end()) return std::nullopt;
    return it->second;
}

bool Alphabet::operator==(const Alphabet& other) const {
    auto levels_equal = [](const std::vector<OutcomeLevel>& a, const std::vector<OutcomeLevel>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].label != b[i].label || a[i].value != b[i].value) return false;
        }
        return true;
    };
    return x_labels_ == other.x_labels_ && levels_equal(y1_levels_, other.y1_levels_) &&
           levels_equal(y2_levels_, other.y2_levels_);
}

}  // namespace shiftlab
