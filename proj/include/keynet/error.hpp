#pragma once

#include <stdexcept>
#include <string>

namespace keynet {

// Base for every domain failure raised by the library. The CLI maps these to
// exit status 1; I/O and usage problems map to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position = npos)
        : Error(position == npos ? what : what + " (at byte " + std::to_string(position) + ")"),
          position_(position) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A protocol run that cannot complete. element_id names the dead link or
// failing channel.
class ProtocolAbort : public Error {
public:
    ProtocolAbort(std::string element_id, const std::string& what)
        : Error(what), element_id_(std::move(element_id)) {}

    const std::string& element_id() const noexcept { return element_id_; }

private:
    std::string element_id_;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

// Unreadable input files; mapped to exit status 2.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace keynet
