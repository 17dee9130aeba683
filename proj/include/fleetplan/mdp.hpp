#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fleetplan {

using StateIndex = std::uint32_t;
using DecisionId = std::int32_t;

/// One sparse transition: probability of landing in `successor`.
struct TransitionEntry {
    StateIndex successor = 0;
    double probability = 0.0;
};

/// Value of every state, indexed by state.
using ValueFunction = std::vector<double>;

/// Chosen decision id for every state, indexed by state.
using Policy = std::vector<DecisionId>;

/// Finite discounted MDP with per-state decision sets and sparse successor
/// rows, stored CSR-style. Decision ids are strictly ascending within a
/// state and successor lists are sorted by state index; every backup sums a
/// row in stored order, which makes solves reproducible bit for bit.
struct MdpModel {
    std::size_t num_states = 0;
    double discount = 0.0;

    std::vector<std::size_t> state_begin;  // num_states + 1 offsets into slots
    std::vector<DecisionId> decision_ids;  // one per (state, decision) slot
    std::vector<double> rewards;           // one per slot
    std::vector<std::size_t> row_begin;    // num_slots + 1 offsets into entries
    std::vector<TransitionEntry> entries;

    std::size_t num_slots() const { return decision_ids.size(); }

    std::size_t decision_count(StateIndex state) const {
        return state_begin[state + 1] - state_begin[state];
    }

    std::span<const TransitionEntry> row(std::size_t slot) const {
        return {entries.data() + row_begin[slot], row_begin[slot + 1] - row_begin[slot]};
    }

    /// Slot of `decision` in `state`, or npos when the state lacks it.
    std::size_t find_slot(StateIndex state, DecisionId decision) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Incremental CSR assembly. States must be filled in ascending order;
/// decision ids within a state must arrive strictly ascending. Rows are
/// sorted by successor and duplicate successors merged.
class MdpBuilder {
  public:
    MdpBuilder(std::size_t num_states, double discount);

    void add_decision(StateIndex state, DecisionId decision, double reward,
                      std::vector<TransitionEntry> row);

    MdpModel finish();

  private:
    MdpModel model_;
    std::int64_t last_state_ = -1;
};

struct BellmanResult {
    double value = 0.0;
    DecisionId decision = 0;
};

/// Tolerance used for row-stochasticity checks throughout.
inline constexpr double kRowSumTolerance = 1e-9;

/// One-state Bellman backup against ``values``: the best decision value
/// R(s,d) + discount * sum_s' P(s'|s,d) values[s'] and its decision id.
/// Ties go to the lowest decision id.
BellmanResult bellman_backup(const MdpModel& model, const ValueFunction& values,
                             StateIndex state);

struct SolveReport {
    std::size_t iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
};

struct SolveOptions {
    double tolerance = 1e-6;
    std::size_t max_iterations = 10000;
    unsigned threads = 1;  // Jacobi sweeps; any thread count gives identical values
};

/// Value iteration from all-zero initial values. Stops once the sup-norm
/// difference between sweeps drops below the tolerance, or after
/// max_iterations sweeps with converged=false. Validates the model first.
std::pair<ValueFunction, SolveReport> value_iteration(const MdpModel& model,
                                                      const SolveOptions& options);
std::pair<ValueFunction, SolveReport> value_iteration(const MdpModel& model,
                                                      double tolerance,
                                                      std::size_t max_iterations = 10000);

/// Greedy policy at ``optimal_values``; ties go to the lowest decision id.
Policy extract_policy(const MdpModel& model, const ValueFunction& optimal_values);

/// Fixed point of the policy-restricted Bellman operator, iterated until the
/// sup-norm sweep difference drops below ``tolerance``.
ValueFunction evaluate_policy(const MdpModel& model, const Policy& policy,
                              double tolerance);

/// Structural checks for every MdpModel invariant. Returns one message per
/// violation naming the state, decision, and failed check; empty means valid.
std::vector<std::string> validate_model(const MdpModel& model);

}  // namespace fleetplan
