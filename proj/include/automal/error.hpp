#pragma once

#include <stdexcept>
#include <string>

namespace automal {

// Base error for everything this library throws on bad input or bad state.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed files, unreadable paths, corrupt artifacts.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Arguments outside an operation's documented domain.
class ValueError : public Error {
public:
    explicit ValueError(const std::string& msg) : Error(msg) {}
};

}  // namespace automal
