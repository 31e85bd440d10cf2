#pragma once

#include <stdexcept>
#include <string>

namespace lppo {

/// Base exception for every validation and I/O failure raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the scheduler when neither active problems nor queued prefixes remain.
class TrainingExhausted : public Error {
 public:
  TrainingExhausted() : Error("training exhausted: no active problems and empty prefix queue") {}
};

}  // namespace lppo
