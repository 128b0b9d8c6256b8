// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sigmine {

/// Base class for every error thrown by the library.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing files, unreadable paths, failed writes.
struct io_error : error {
    explicit io_error(const std::string& msg) : error(msg) {}
};

/// Malformed file contents (bad header, bad pattern, bad config).
struct format_error : error {
    explicit format_error(const std::string& msg) : error(msg) {}
};

/// Contract violations on otherwise well-formed inputs
/// (empty vocabulary, constant series, out-of-vocabulary word, ...).
struct domain_error : error {
    explicit domain_error(const std::string& msg) : error(msg) {}
};

} // namespace sigmine
