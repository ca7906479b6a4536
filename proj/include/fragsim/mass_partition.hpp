#pragma once

// The state space: finitely many positive masses in non-increasing order,
// trailing zeros implicit. Values are plain vectors; `rearrange` produces the
// canonical form and all constructors of states go through it.

#include <string>
#include <vector>

namespace fragsim {

using MassPartition = std::vector<double>;

// Decreasing rearrangement; drops zeros and entries below 1e-15 of the leading
// mass (denormal noise guard). Throws config_error on negative input.
MassPartition rearrange(std::vector<double> values);

// l1 distance with implicit zero padding.
double l1_distance(const MassPartition& a, const MassPartition& b);

// Decreasing rearrangement of the concatenation.
MassPartition merge(const std::vector<MassPartition>& parts);

// Multiply every mass by x > 0.
MassPartition scale(double x, const MassPartition& p);

double total_mass(const MassPartition& p);

bool is_non_increasing(const MassPartition& p);

// JSON array of numbers, non-increasing. The reader re-validates ordering.
std::string partition_to_json(const MassPartition& p);
MassPartition partition_from_json(const std::string& text);

}  // namespace fragsim
