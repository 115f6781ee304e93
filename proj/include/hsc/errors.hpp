#pragma once

#include <stdexcept>
#include <string>

namespace hsc {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// alpha_h(t, x1) <= 0: the hard barrier is undefined.
class BarrierBreach : public Error {
public:
    explicit BarrierBreach(const std::string& what, double value = 0.0)
        : Error(what), value_(value) {}
    double value() const { return value_; }

private:
    double value_;
};

/// e_s(t, x1) <= 0: the soft barrier is undefined.
class SoftBarrierBreach : public Error {
public:
    explicit SoftBarrierBreach(const std::string& what, double value = 0.0)
        : Error(what), value_(value) {}
    double value() const { return value_; }

private:
    double value_;
};

/// A normalized layer error left (-1, 1).
class FunnelBreach : public Error {
public:
    FunnelBreach(const std::string& what, int layer, int component)
        : Error(what), layer_(layer), component_(component) {}
    int layer() const { return layer_; }
    int component() const { return component_; }

private:
    int layer_;
    int component_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace hsc
