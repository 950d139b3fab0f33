#pragma once

#include <stdexcept>
#include <string>

namespace srnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent on-disk data (missing file, undecodable image, size mismatch).
class DatasetError : public Error {
 public:
  DatasetError(const std::string& record_id, const std::string& what)
      : Error("record " + record_id + ": " + what), record_id_(record_id) {}

  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::string record_id_;
};

/// Tensor shapes or value ranges that violate a module contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint does not match the architecture it is loaded into.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// A loss became NaN/Inf during training.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace srnet
