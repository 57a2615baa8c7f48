#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub {

// Ordered record of differentiable op applications. Ops record onto the tape
// that is active on the calling thread (see Tape::Scope); with no active tape
// they run forward-only and nothing is retained.
//
// A tape and the tensors it references belong to one thread of execution.
// Separate tapes may be driven from separate threads.
class Tape {
 public:
  // Accumulates into the gradients of `inputs` given the gradient held by `output`.
  using BackwardRule = std::function<void(const Tensor& output, std::vector<Tensor>& inputs)>;

  struct Entry {
    const char* op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardRule backward;
  };

  // Makes a tape the active recording target for the current thread until
  // destruction, restoring whatever was active before.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  // Suspends recording on the current thread (inference) until destruction.
  class Pause {
   public:
    Pause();
    ~Pause();
    Pause(const Pause&) = delete;
    Pause& operator=(const Pause&) = delete;

   private:
    Tape* previous_;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(Entry entry);

  // Seeds d(loss)/d(loss) = 1 and replays recorded rules in reverse order.
  // Throws ShapeError for a non-scalar loss and ContractError when the tape
  // was already replayed or the loss was not produced on this tape.
  void backward(const Tensor& loss);

  // Drops every entry so the tape can record a fresh graph.
  void reset();

  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }
  const std::vector<Entry>& entries() const { return entries_; }

  static Tape* active();

 private:
  std::vector<Entry> entries_;
  bool consumed_ = false;
};

// backward() on the thread's active tape.
void backward(const Tensor& loss);

// Opt-in debug mode: every op output is scanned and a NumericError naming the
// op is thrown on the first NaN/Inf. Process-wide.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

}  // namespace gatehub
