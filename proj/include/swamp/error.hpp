#ifndef SWAMP_ERROR_HPP
#define SWAMP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace swamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (k out of range, bad percent, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A single file could not be read or parsed. Callers demote the file to
/// FileType::Other and keep going.
class FileError : public Error {
 public:
  FileError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Not enough usable input for a modality (no text features, fewer than two
/// tabular files, ...).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace swamp

#endif  // SWAMP_ERROR_HPP
