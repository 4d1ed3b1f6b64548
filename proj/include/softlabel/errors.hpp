#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softlabel {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A requested mixture would leave the probability simplex. Carries the
// coordinate that went negative so callers can report it.
class FeasibilityError : public Error {
 public:
  FeasibilityError(const std::string& what, int violating_class)
      : Error(what), violating_class_(violating_class) {}
  int violating_class() const { return violating_class_; }

 private:
  int violating_class_;
};

class DegenerateSupervisionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field = "")
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DataError : public Error {
 public:
  DataError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace softlabel
