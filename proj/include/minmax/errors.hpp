#pragma once

#include <stdexcept>
#include <string>

namespace minmax {

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotPositiveDefinite : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NotPsd : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class RankDeficient : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested combination is well-formed but not implemented (e.g. f3 with a band matrix).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ask/tell called out of order.
class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace minmax
