// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spm {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed text input. `line` is 1-based.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line_number)
        : Error("line " + std::to_string(line_number) + ": " + what), line(line_number) {}
    std::size_t line;
};

/// A value falls outside the range its field can represent.
struct RangeError : Error {
    using Error::Error;
};

}  // namespace spm
