#pragma once

#include <Eigen/Dense>
#include <string_view>
#include <vector>

#include "msvr/dataset.hpp"

namespace msvr {

// (1/(2n)) sum_i ||y_NN(i) - y_i||^2 with NN under Euclidean input distance,
// excluding i; ties go to the lowest index.
double delta_test(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs);

enum class LagSearch { Windows, Forward };

std::string_view to_string(LagSearch s);
LagSearch lag_search_from_string(std::string_view name);

struct CandidateScore {
    LagSet lags;
    double delta = 0.0;
};

struct SelectionResult {
    LagSet chosen_lags;
    double delta_value = 0.0;
    int candidates_evaluated = 0;
    LagSearch search = LagSearch::Windows;
    std::vector<CandidateScore> candidates; // in evaluation order
};

// Every candidate is scored on the same rows: the embedding of the full
// window {0..max_lag-1}. Targets are phi_{t+1} for iterated and the H-block
// phi_{t+1..t+H} for direct and MIMO.
SelectionResult select_inputs(const TimeSeries& series, int max_lag, int horizon, Strategy mode,
                              LagSearch search = LagSearch::Windows);

} // namespace msvr
