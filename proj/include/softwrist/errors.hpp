#pragma once

#include <stdexcept>
#include <string>

namespace softwrist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Mapped inertia singular or too ill-conditioned to solve against.
class SingularDynamics : public Error {
 public:
  using Error::Error;
};

// Tendon map J_mu^T A_b is rank deficient.
class ActuationSingularity : public Error {
 public:
  using Error::Error;
};

// L_g(sigma) vanished; the equivalent control is undefined.
class ControlSingularity : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  TrainingFailure(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace softwrist
