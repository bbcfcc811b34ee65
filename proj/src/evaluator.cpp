#include "flowmine/evaluator.hpp"

#include <algorithm>
#include <set>

namespace flowmine {

EvalReport evaluate_greedy(const std::vector<FlowSpec>& flows,
                           const Trace& trace) {
  struct Instance {
    std::size_t flow = 0;
    MessageId node = 0;
    std::vector<std::size_t> events;
    bool done = false;
  };

  EvalReport report;
  report.policy = "greedy-oldest";
  report.total_events = trace.size();
  if (trace.empty()) {
    report.rate = 1.0;
    return report;
  }

  std::vector<Instance> instances;   // spawn order == instance id
  std::vector<std::uint32_t> active; // indices into `instances`, oldest first
  std::vector<bool> accepted(trace.size(), false);

  for (std::size_t i = 0; i < trace.size(); ++i) {
    MessageId ev = trace.events[i];

    // A start event always spawns, even if an active instance could consume
    // it as an interior event. First matching flow in declaration order wins.
    std::size_t start_flow = flows.size();
    for (std::size_t f = 0; f < flows.size(); ++f) {
      if (flows[f].start() == ev) {
        start_flow = f;
        break;
      }
    }
    if (start_flow != flows.size()) {
      Instance inst;
      inst.flow = start_flow;
      inst.node = ev;
      inst.events.push_back(i);
      accepted[i] = true;
      if (flows[start_flow].is_end(ev)) {
        inst.done = true;  // single-message flow: spawn and finish at once
        instances.push_back(std::move(inst));
      } else {
        instances.push_back(std::move(inst));
        active.push_back(static_cast<std::uint32_t>(instances.size() - 1));
      }
      continue;
    }

    // Otherwise the oldest active instance with an edge (node -> ev) advances.
    std::vector<std::uint32_t> fitting;
    for (std::uint32_t idx : active) {
      const Instance& inst = instances[idx];
      const auto& succ = flows[inst.flow].successors(inst.node);
      if (std::binary_search(succ.begin(), succ.end(), ev)) {
        fitting.push_back(idx);
      }
    }
    if (fitting.empty()) {
      continue;  // rejected
    }
    if (fitting.size() > 1) {
      report.nondet.push_back(NondetNote{i, fitting});
    }
    std::uint32_t idx = fitting.front();
    Instance& inst = instances[idx];
    inst.node = ev;
    inst.events.push_back(i);
    accepted[i] = true;
    if (flows[inst.flow].is_end(ev)) {
      inst.done = true;
      active.erase(std::find(active.begin(), active.end(), idx));
    }
  }

  // Unfinished instances: every consumed event flips back to rejected.
  for (const Instance& inst : instances) {
    if (!inst.done) {
      ++report.incomplete_instances;
      for (std::size_t i : inst.events) accepted[i] = false;
    }
    InstanceTrace it;
    it.flow_index = inst.flow;
    it.event_indices = inst.events;
    it.completed = inst.done;
    report.decomposition.push_back(std::move(it));
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (accepted[i]) {
      ++report.accepted;
    } else {
      report.rejected_indices.push_back(i);
    }
  }
  report.rejected = trace.size() - report.accepted;
  report.rate =
      static_cast<double>(report.accepted) / static_cast<double>(trace.size());
  return report;
}

}  // namespace flowmine
