#include <algorithm>

#include "flowmine/errors.hpp"
#include "flowmine/seqmodel.hpp"

namespace flowmine {

Vocab::Vocab(const Catalog& catalog) : Vocab(catalog.ids()) {}

Vocab::Vocab(std::vector<MessageId> sorted_ids) : ids_(std::move(sorted_ids)) {
  if (!std::is_sorted(ids_.begin(), ids_.end())) {
    std::sort(ids_.begin(), ids_.end());
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == kMaskId) {
      throw InvariantViolation("vocab: message id 0 is reserved");
    }
    auto [it, fresh] = to_token_.emplace(ids_[i], static_cast<int>(i) + 1);
    (void)it;
    if (!fresh) {
      throw InvariantViolation("vocab: duplicate message id");
    }
  }
}

bool Vocab::has_id(MessageId id) const { return to_token_.count(id) != 0; }

int Vocab::token(MessageId id) const {
  auto it = to_token_.find(id);
  if (it == to_token_.end()) throw UnknownId(id, "vocab");
  return it->second;
}

MessageId Vocab::id(int token) const {
  if (token < 1 || token > static_cast<int>(ids_.size())) {
    throw UnknownId(static_cast<MessageId>(token), "vocab token");
  }
  return ids_[static_cast<std::size_t>(token - 1)];
}

}  // namespace flowmine
