#include "gatehub/tape.hpp"

#include <atomic>

#include "gatehub/errors.hpp"

namespace gatehub {

namespace {
thread_local Tape* g_active_tape = nullptr;
std::atomic<bool> g_finite_checks{false};
}  // namespace

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

Tape::Scope::~Scope() { g_active_tape = previous_; }

Tape::Pause::Pause() : previous_(g_active_tape) { g_active_tape = nullptr; }

Tape::Pause::~Pause() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(Entry entry) {
  if (consumed_) throw ContractError("recording onto a tape that was already replayed; reset() it first");
  entries_.push_back(std::move(entry));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw ContractError("backward on an undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + loss.shape().str());
  }
  if (consumed_) throw ContractError("backward called twice on the same tape without reset()");
  if (!loss.requires_grad()) throw ContractError("loss does not depend on any tensor requiring grad");

  bool found = false;
  for (const auto& e : entries_) {
    if (e.output.same_storage(loss)) {
      found = true;
      break;
    }
  }
  if (!found) throw ContractError("loss was not produced on this tape");

  consumed_ = true;
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->backward(it->output, it->inputs);
  }
}

void Tape::reset() {
  entries_.clear();
  consumed_ = false;
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw ContractError("backward() with no active tape");
  tape->backward(loss);
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled, std::memory_order_relaxed); }

bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }

}  // namespace gatehub
