#pragma once

#include <stdexcept>
#include <string>

namespace wt {

class SpectralError : public std::runtime_error {
 public:
  explicit SpectralError(const std::string& msg) : std::runtime_error(msg) {}
};

class NonHermitian : public SpectralError {
 public:
  explicit NonHermitian(const std::string& msg) : SpectralError(msg) {}
};

class GridOutsideDomain : public SpectralError {
 public:
  explicit GridOutsideDomain(const std::string& msg) : SpectralError(msg) {}
};

class StepSizeUnderflow : public SpectralError {
 public:
  explicit StepSizeUnderflow(const std::string& msg) : SpectralError(msg) {}
};

class GridMismatch : public SpectralError {
 public:
  explicit GridMismatch(const std::string& msg) : SpectralError(msg) {}
};

class SingularNormalization : public SpectralError {
 public:
  explicit SingularNormalization(const std::string& msg) : SpectralError(msg) {}
};

class TruncationNotConverged : public SpectralError {
 public:
  explicit TruncationNotConverged(const std::string& msg) : SpectralError(msg) {}
};

class SingularPencil : public SpectralError {
 public:
  explicit SingularPencil(const std::string& msg) : SpectralError(msg) {}
};

class SingularW : public SpectralError {
 public:
  explicit SingularW(const std::string& msg) : SpectralError(msg) {}
};

class SingularShift : public SpectralError {
 public:
  explicit SingularShift(const std::string& msg) : SpectralError(msg) {}
};

class NotHerglotz : public SpectralError {
 public:
  explicit NotHerglotz(const std::string& msg) : SpectralError(msg) {}
};

class KernelMismatch : public SpectralError {
 public:
  explicit KernelMismatch(const std::string& msg) : SpectralError(msg) {}
};

class PartitionMismatch : public SpectralError {
 public:
  explicit PartitionMismatch(const std::string& msg) : SpectralError(msg) {}
};

class ConfigError : public SpectralError {
 public:
  explicit ConfigError(const std::string& msg) : SpectralError(msg) {}
};

} // namespace wt
