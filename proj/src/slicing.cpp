#include "flowmine/slicing.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowmine {

std::vector<Trace> causality_slice(const Trace& trace, const Catalog& catalog,
                                   Predicate predicate, std::size_t window) {
  if (window < 2) {
    throw std::invalid_argument("causality_slice: window must be >= 2");
  }
  std::vector<Trace> slices;
  // Indices into `slices`, most recently extended first.
  std::vector<std::size_t> recency;

  for (MessageId ev : trace.events) {
    const Message& cur = catalog.at(ev);
    std::size_t chosen = slices.size();
    for (std::size_t r : recency) {
      const auto& events = slices[r].events;
      std::size_t lo = events.size() > window ? events.size() - window : 0;
      bool related = false;
      for (std::size_t i = events.size(); i > lo; --i) {
        if (causal(catalog.at(events[i - 1]), cur, predicate)) {
          related = true;
          break;
        }
      }
      if (related) {
        chosen = r;
        break;
      }
    }
    if (chosen == slices.size()) {
      slices.push_back(Trace{});
      recency.insert(recency.begin(), chosen);
    } else {
      auto it = std::find(recency.begin(), recency.end(), chosen);
      recency.erase(it);
      recency.insert(recency.begin(), chosen);
    }
    slices[chosen].events.push_back(ev);
  }
  return slices;
}

}  // namespace flowmine
