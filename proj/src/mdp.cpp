#include "fleetplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fleetplan {

namespace {

std::string slot_label(StateIndex state, DecisionId decision) {
    return "state " + std::to_string(state) + " decision " + std::to_string(decision);
}

}  // namespace

std::size_t MdpModel::find_slot(StateIndex state, DecisionId decision) const {
    const auto first = decision_ids.begin() + static_cast<std::ptrdiff_t>(state_begin[state]);
    const auto last = decision_ids.begin() + static_cast<std::ptrdiff_t>(state_begin[state + 1]);
    const auto it = std::lower_bound(first, last, decision);
    if (it == last || *it != decision) return npos;
    return static_cast<std::size_t>(it - decision_ids.begin());
}

MdpBuilder::MdpBuilder(std::size_t num_states, double discount) {
    model_.num_states = num_states;
    model_.discount = discount;
    model_.state_begin.assign(1, 0);
    model_.row_begin.assign(1, 0);
}

void MdpBuilder::add_decision(StateIndex state, DecisionId decision, double reward,
                              std::vector<TransitionEntry> row) {
    if (state >= model_.num_states)
        throw std::invalid_argument("add_decision: state " + std::to_string(state) +
                                    " out of range");
    if (static_cast<std::int64_t>(state) < last_state_)
        throw std::invalid_argument("add_decision: states must be filled in ascending order");
    while (last_state_ < static_cast<std::int64_t>(state)) {
        ++last_state_;
        model_.state_begin.push_back(model_.decision_ids.size());
    }
    if (model_.state_begin[state] < model_.decision_ids.size() &&
        model_.decision_ids.back() >= decision)
        throw std::invalid_argument("add_decision: decision ids must ascend within " +
                                    slot_label(state, decision));

    if (!std::is_sorted(row.begin(), row.end(),
                        [](const TransitionEntry& a, const TransitionEntry& b) {
                            return a.successor < b.successor;
                        })) {
        std::sort(row.begin(), row.end(),
                  [](const TransitionEntry& a, const TransitionEntry& b) {
                      return a.successor < b.successor;
                  });
    }
    // merge duplicate successors
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (out > 0 && row[out - 1].successor == row[i].successor) {
            row[out - 1].probability += row[i].probability;
        } else {
            row[out++] = row[i];
        }
    }
    row.resize(out);

    model_.decision_ids.push_back(decision);
    model_.rewards.push_back(reward);
    model_.entries.insert(model_.entries.end(), row.begin(), row.end());
    model_.row_begin.push_back(model_.entries.size());
}

MdpModel MdpBuilder::finish() {
    while (last_state_ + 1 < static_cast<std::int64_t>(model_.num_states) + 1) {
        ++last_state_;
        model_.state_begin.push_back(model_.decision_ids.size());
    }
    return std::move(model_);
}

BellmanResult bellman_backup(const MdpModel& model, const ValueFunction& values,
                             StateIndex state) {
    if (state >= model.num_states)
        throw std::out_of_range("bellman_backup: state " + std::to_string(state) +
                                " out of range");
    if (values.size() != model.num_states)
        throw std::invalid_argument("bellman_backup: value function has wrong length");

    const std::size_t begin = model.state_begin[state];
    const std::size_t end = model.state_begin[state + 1];
    if (begin == end)
        throw std::invalid_argument("bellman_backup: state " + std::to_string(state) +
                                    " has no decisions");

    BellmanResult best;
    bool first = true;
    for (std::size_t slot = begin; slot < end; ++slot) {
        double expected = 0.0;
        for (const TransitionEntry& entry : model.row(slot))
            expected += entry.probability * values[entry.successor];
        const double q = model.rewards[slot] + model.discount * expected;
        if (first || q > best.value) {
            best.value = q;
            best.decision = model.decision_ids[slot];
            first = false;
        }
    }
    return best;
}

namespace {

void sweep(const MdpModel& model, const ValueFunction& current, ValueFunction& next,
           unsigned threads) {
    const std::size_t n = model.num_states;
    auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s)
            next[s] = bellman_backup(model, current, static_cast<StateIndex>(s)).value;
    };
    if (threads <= 1 || n < 2 * threads) {
        run(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = std::min(n, static_cast<std::size_t>(t) * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(run, lo, hi);
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace

std::pair<ValueFunction, SolveReport> value_iteration(const MdpModel& model,
                                                      const SolveOptions& options) {
    if (!(options.tolerance > 0.0))
        throw std::invalid_argument("value_iteration: tolerance must be positive");
    if (auto violations = validate_model(model); !violations.empty())
        throw std::invalid_argument("value_iteration: invalid model: " + violations.front());

    ValueFunction current(model.num_states, 0.0);
    ValueFunction next(model.num_states, 0.0);
    SolveReport report;

    while (report.iterations < options.max_iterations) {
        sweep(model, current, next, options.threads);
        double residual = 0.0;
        for (std::size_t s = 0; s < model.num_states; ++s)
            residual = std::max(residual, std::abs(next[s] - current[s]));
        if (!std::isfinite(residual))
            throw std::runtime_error("value_iteration: non-finite values after iteration " +
                                     std::to_string(report.iterations + 1));
        current.swap(next);
        ++report.iterations;
        report.final_residual = residual;
        if (residual < options.tolerance) {
            report.converged = true;
            break;
        }
    }
    return {std::move(current), report};
}

std::pair<ValueFunction, SolveReport> value_iteration(const MdpModel& model, double tolerance,
                                                      std::size_t max_iterations) {
    SolveOptions options;
    options.tolerance = tolerance;
    options.max_iterations = max_iterations;
    return value_iteration(model, options);
}

Policy extract_policy(const MdpModel& model, const ValueFunction& optimal_values) {
    Policy policy(model.num_states, 0);
    for (std::size_t s = 0; s < model.num_states; ++s)
        policy[s] = bellman_backup(model, optimal_values, static_cast<StateIndex>(s)).decision;
    return policy;
}

ValueFunction evaluate_policy(const MdpModel& model, const Policy& policy, double tolerance) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("evaluate_policy: tolerance must be positive");
    if (policy.size() != model.num_states)
        throw std::invalid_argument("evaluate_policy: policy has wrong length");

    std::vector<std::size_t> slots(model.num_states);
    for (std::size_t s = 0; s < model.num_states; ++s) {
        const std::size_t slot = model.find_slot(static_cast<StateIndex>(s), policy[s]);
        if (slot == MdpModel::npos)
            throw std::invalid_argument("evaluate_policy: " +
                                        slot_label(static_cast<StateIndex>(s), policy[s]) +
                                        " is not available");
        slots[s] = slot;
    }

    ValueFunction current(model.num_states, 0.0);
    ValueFunction next(model.num_states, 0.0);
    while (true) {
        double residual = 0.0;
        for (std::size_t s = 0; s < model.num_states; ++s) {
            double expected = 0.0;
            for (const TransitionEntry& entry : model.row(slots[s]))
                expected += entry.probability * current[entry.successor];
            next[s] = model.rewards[slots[s]] + model.discount * expected;
            residual = std::max(residual, std::abs(next[s] - current[s]));
        }
        current.swap(next);
        if (residual < tolerance) break;
    }
    return current;
}

std::vector<std::string> validate_model(const MdpModel& model) {
    std::vector<std::string> violations;
    auto report = [&violations](std::string message) {
        violations.push_back(std::move(message));
    };

    if (model.num_states == 0) report("model has no states");
    if (!(model.discount >= 0.0) || !(model.discount < 1.0))
        report("discount " + std::to_string(model.discount) + " outside [0,1)");
    if (model.state_begin.size() != model.num_states + 1 ||
        model.row_begin.size() != model.num_slots() + 1 ||
        model.rewards.size() != model.num_slots()) {
        report("inconsistent CSR layout");
        return violations;  // nothing else is safe to inspect
    }

    for (std::size_t s = 0; s < model.num_states; ++s) {
        const std::size_t begin = model.state_begin[s];
        const std::size_t end = model.state_begin[s + 1];
        if (begin == end) {
            report("state " + std::to_string(s) + ": no decisions");
            continue;
        }
        for (std::size_t slot = begin; slot < end; ++slot) {
            const DecisionId decision = model.decision_ids[slot];
            const std::string label = slot_label(static_cast<StateIndex>(s), decision);
            if (slot > begin && model.decision_ids[slot - 1] >= decision)
                report(label + ": decision ids not strictly ascending");

            const double reward = model.rewards[slot];
            if (!std::isfinite(reward))
                report(label + ": reward is not finite");
            else if (!(reward > 0.0))
                report(label + ": reward " + std::to_string(reward) +
                       " is not strictly positive");

            double sum = 0.0;
            StateIndex previous = 0;
            bool have_previous = false;
            for (const TransitionEntry& entry : model.row(slot)) {
                if (entry.successor >= model.num_states)
                    report(label + ": successor " + std::to_string(entry.successor) +
                           " out of range");
                if (have_previous && entry.successor <= previous)
                    report(label + ": successors not strictly ascending");
                previous = entry.successor;
                have_previous = true;
                if (!std::isfinite(entry.probability) || entry.probability < 0.0)
                    report(label + ": probability " + std::to_string(entry.probability) +
                           " is negative or not finite");
                sum += entry.probability;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                report(label + ": transition probabilities sum to " + std::to_string(sum));
        }
    }
    return violations;
}

}  // namespace fleetplan
