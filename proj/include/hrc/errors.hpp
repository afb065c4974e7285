#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hrc {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class CycleError : public Error {
 public:
  explicit CycleError(std::vector<int> cycle);
  const std::vector<int>& cycle() const { return cycle_; }

 private:
  std::vector<int> cycle_;
};

// A task no agent is able to execute.
class InfeasibleStructure : public Error {
 public:
  using Error::Error;
};

// No labeling satisfies the quality bounds.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class NodeBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UnknownMetric : public Error {
 public:
  using Error::Error;
};

class ZeroHorizon : public Error {
 public:
  using Error::Error;
};

class MissingRealization : public Error {
 public:
  using Error::Error;
};

class NotExecuting : public Error {
 public:
  using Error::Error;
};

class TraceMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace hrc
