#include "prediag/vote.hpp"

#include <string>

#include "prediag/error.hpp"

namespace prediag::ml {

Label majority_vote(std::span<const Label> labels) {
  if (labels.empty()) throw InvalidArgument("cannot vote over an empty sequence");
  std::size_t ones = 0;
  for (Label l : labels) {
    require_binary_label(l);
    ones += static_cast<std::size_t>(l);
  }
  return 2 * ones >= labels.size() ? 1 : 0;
}

std::vector<Label> sliding_window_vote(std::span<const Label> labels, std::size_t window) {
  if (labels.empty()) throw InvalidArgument("cannot vote over an empty sequence");
  if (window == 0 || window % 2 == 0) throw InvalidArgument("voting window must be odd, got " + std::to_string(window));
  if (window > labels.size())
    throw InvalidArgument("voting window " + std::to_string(window) + " exceeds sequence length " +
                          std::to_string(labels.size()));
  std::vector<Label> out;
  out.reserve(labels.size() - window + 1);
  for (std::size_t i = 0; i + window <= labels.size(); ++i) out.push_back(majority_vote(labels.subspan(i, window)));
  return out;
}

Label sequence_decision(std::span<const Label> labels, std::size_t window) {
  if (labels.empty()) throw InvalidArgument("cannot vote over an empty sequence");
  if (window == 0 || window % 2 == 0) throw InvalidArgument("voting window must be odd, got " + std::to_string(window));
  if (labels.size() < window) return majority_vote(labels);
  return majority_vote(sliding_window_vote(labels, window));
}

} // namespace prediag::ml
