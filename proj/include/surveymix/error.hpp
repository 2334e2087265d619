#ifndef SURVEYMIX_ERROR_HPP
#define SURVEYMIX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace smx {

// Mirrors the status codes of the C API (c_api.h).
enum class Status {
    Ok = 0,
    IoError = 1,
    ParseError = 2,
    InvalidArgument = 3,
    NumericError = 4,
    EmptyResult = 5,
    Unsupported = 6,
    FitFailure = 7,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& message)
        : std::runtime_error(message), status_(status) {}

    Status status() const { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void raise(Status status, const std::string& message) {
    throw Error(status, message);
}

} // namespace smx

#endif
