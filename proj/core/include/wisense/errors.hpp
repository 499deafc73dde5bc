// SPDX-License-Identifier: Apache-2.0
//
// Copyright (c) 2026 The wisense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace wisense {

/// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCategory : int {
    config = 2,
    data = 3,
    numeric = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Invalid argument value (zero window, probability out of range, ...).
class ParameterError : public ConfigError {
public:
    explicit ParameterError(const std::string& what) : ConfigError(what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Structurally broken input (bad magic, bad version, trailing bytes).
class FormatError : public DataError {
public:
    FormatError(const std::string& what, std::uint64_t byte_offset)
        : DataError(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::uint64_t byte_offset() const { return byte_offset_; }

private:
    std::uint64_t byte_offset_;
};

/// Record cut short by end of file.
class PartialRecordError : public DataError {
public:
    PartialRecordError(const std::string& what, std::size_t record_index)
        : DataError(what + " (record " + std::to_string(record_index) + ")"),
          record_index_(record_index) {}

    std::size_t record_index() const { return record_index_; }

private:
    std::size_t record_index_;
};

/// Well-formed bytes violating a declared schema (wrong subcarrier count,
/// out-of-range sequence number, non-finite sample).
class SchemaError : public DataError {
public:
    SchemaError(const std::string& what, std::size_t record_index)
        : DataError(what + " (record " + std::to_string(record_index) + ")"),
          record_index_(record_index) {}

    std::size_t record_index() const { return record_index_; }

private:
    std::size_t record_index_;
};

class MaskError : public DataError {
public:
    explicit MaskError(const std::string& what) : DataError(what) {}
};

/// Operation applied in the wrong pipeline state (e.g. pruning twice).
class StateError : public DataError {
public:
    explicit StateError(const std::string& what) : DataError(what) {}
};

class ShapeError : public DataError {
public:
    explicit ShapeError(const std::string& what) : DataError(what) {}
};

class AlignmentError : public DataError {
public:
    explicit AlignmentError(const std::string& what) : DataError(what) {}
};

class WraparoundError : public AlignmentError {
public:
    explicit WraparoundError(const std::string& what) : AlignmentError(what) {}
};

class DegenerateRecordError : public DataError {
public:
    explicit DegenerateRecordError(const std::string& what) : DataError(what) {}
};

/// Episode construction impossible (missing class, too few samples).
class EpisodeError : public DataError {
public:
    explicit EpisodeError(const std::string& what) : DataError(what) {}
};

/// Training set cannot support the requested optimization (single class).
class DegenerateTrainingError : public DataError {
public:
    explicit DegenerateTrainingError(const std::string& what) : DataError(what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

/// Non-fatal diagnostics (degenerate records dropped, rank-deficient frames).
/// Kept off stdout so report files stay machine-readable.
inline void warn(const std::string& message) {
    std::fprintf(stderr, "wisense: warning: %s\n", message.c_str());
}

}  // namespace wisense
