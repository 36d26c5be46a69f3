#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::ml {

/// Majority label; ties resolve to 1.
Label majority_vote(std::span<const Label> labels);

/// output[i] = majority of labels[i, i + window). Window must be odd and
/// no longer than the sequence.
std::vector<Label> sliding_window_vote(std::span<const Label> labels, std::size_t window);

/// Majority over the sliding-window outputs, or over the raw labels when
/// the sequence is shorter than the window.
Label sequence_decision(std::span<const Label> labels, std::size_t window);

} // namespace prediag::ml
