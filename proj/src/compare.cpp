#include "flowmine/evaluator.hpp"

#include <algorithm>

namespace flowmine {

FlowComparison compare_flows(const std::vector<FlowSpec>& a,
                             const std::vector<FlowSpec>& b) {
  FlowComparison cmp;
  std::vector<bool> used_b(b.size(), false);
  std::size_t inter_total = 0, a_total = 0, b_total = 0;

  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t match = b.size();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used_b[j] && a[i].start() == b[j].start() &&
          a[i].ends() == b[j].ends()) {
        match = j;
        break;
      }
    }
    if (match == b.size()) {
      cmp.unmatched_a.push_back(i);
      continue;
    }
    used_b[match] = true;

    FlowMatch fm;
    fm.index_a = i;
    fm.index_b = match;
    fm.start = a[i].start();
    const auto& ea = a[i].edges();
    const auto& eb = b[match].edges();
    std::size_t inter = 0;
    for (const auto& e : ea) {
      if (eb.count(e)) {
        ++inter;
      } else {
        fm.spurious.push_back(e);
      }
    }
    for (const auto& e : eb) {
      if (!ea.count(e)) fm.missing.push_back(e);
    }
    fm.edge_precision = ea.empty() ? 1.0 : double(inter) / double(ea.size());
    fm.edge_recall = eb.empty() ? 1.0 : double(inter) / double(eb.size());
    inter_total += inter;
    a_total += ea.size();
    b_total += eb.size();
    cmp.matches.push_back(std::move(fm));
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!used_b[j]) cmp.unmatched_b.push_back(j);
  }
  cmp.micro_precision =
      a_total == 0 ? 1.0 : double(inter_total) / double(a_total);
  cmp.micro_recall = b_total == 0 ? 1.0 : double(inter_total) / double(b_total);
  return cmp;
}

}  // namespace flowmine
