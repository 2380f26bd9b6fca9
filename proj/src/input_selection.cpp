#include "msvr/input_selection.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "msvr/error.hpp"
#include "msvr/strategies.hpp"

namespace msvr {

double delta_test(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs) {
    const Eigen::Index n = inputs.rows();
    if (n < 2) throw InputError("delta_test: need at least 2 rows");
    if (outputs.rows() != n) throw InputError("delta_test: inputs and outputs differ in row count");
    if (inputs.cols() < 1 || outputs.cols() < 1) throw InputError("delta_test: empty inputs or outputs");

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index nn = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = 0.0;
            for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
                const double diff = inputs(i, c) - inputs(j, c);
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                nn = j;
            }
        }
        acc += (outputs.row(nn) - outputs.row(i)).squaredNorm();
    }
    return acc / (2.0 * static_cast<double>(n));
}

std::string_view to_string(LagSearch s) { return s == LagSearch::Windows ? "windows" : "forward"; }

LagSearch lag_search_from_string(std::string_view name) {
    if (name == "windows" || name == "exhaustive_windows") return LagSearch::Windows;
    if (name == "forward") return LagSearch::Forward;
    throw InputError("unknown lag search '" + std::string(name) + "'");
}

namespace {

// Strictly better: lower delta, then fewer lags, then lexicographically smaller.
bool better(const CandidateScore& a, const CandidateScore& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.lags.size() != b.lags.size()) return a.lags.size() < b.lags.size();
    return a.lags < b.lags;
}

class Scorer {
public:
    Scorer(const EmbeddedDataset& full, SelectionResult& out) : full_(full), out_(out) {}

    CandidateScore operator()(const LagSet& lags) {
        Eigen::MatrixXd x(full_.rows(), static_cast<Eigen::Index>(lags.size()));
        for (std::size_t c = 0; c < lags.size(); ++c) x.col(static_cast<Eigen::Index>(c)) = full_.inputs.col(lags[c]);
        CandidateScore s{lags, delta_test(x, full_.outputs)};
        out_.candidates.push_back(s);
        ++out_.candidates_evaluated;
        return s;
    }

private:
    const EmbeddedDataset& full_;
    SelectionResult& out_;
};

} // namespace

SelectionResult select_inputs(const TimeSeries& series, int max_lag, int horizon, Strategy mode, LagSearch search) {
    if (max_lag < 1) throw InputError("select_inputs: max_lag must be >= 1");
    if (horizon < 1) throw InputError("select_inputs: horizon must be >= 1");
    if (mode == Strategy::Naive || mode == Strategy::SeasonalNaive)
        throw InputError("select_inputs: naive strategies take no inputs");
    series.validate();

    const int width = mode == Strategy::Iterated ? 1 : horizon;
    EmbeddedDataset full;
    try {
        full = embed_block(series.values, contiguous_lags(max_lag), 1, width);
    } catch (const InputError& e) {
        throw InputError(std::string("select_inputs: no feasible candidate (") + e.what() + ")");
    }
    if (full.rows() < 2) throw InputError("select_inputs: no feasible candidate (fewer than 2 embedding rows)");

    SelectionResult out;
    out.search = search;
    Scorer score(full, out);
    CandidateScore best{{}, std::numeric_limits<double>::infinity()};

    if (search == LagSearch::Windows) {
        for (int k = 1; k <= max_lag; ++k) {
            auto s = score(contiguous_lags(k));
            if (better(s, best)) best = std::move(s);
        }
    } else {
        LagSet current;
        while (static_cast<int>(current.size()) < max_lag) {
            CandidateScore step{{}, std::numeric_limits<double>::infinity()};
            for (int lag = 0; lag < max_lag; ++lag) {
                if (std::find(current.begin(), current.end(), lag) != current.end()) continue;
                LagSet trial = current;
                trial.push_back(lag);
                auto s = score(normalize_lags(trial));
                if (better(s, step)) step = std::move(s);
            }
            if (!(step.delta < best.delta)) break;
            best = step;
            current = step.lags;
        }
    }

    out.chosen_lags = best.lags;
    out.delta_value = best.delta;
    return out;
}

} // namespace msvr
