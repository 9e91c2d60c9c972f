#pragma once

#include <stdexcept>
#include <string>

namespace gnv {

// Base class for every error this library raises.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an operation's precondition or a type invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// ── backend errors ──────────────────────────────────────────────

class TransportError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    using Error::Error;
};

class ImageTooLarge : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

// ── prompt optimizer errors ─────────────────────────────────────

class EmptyReply : public Error {
public:
    using Error::Error;
};

class NoChange : public Error {
public:
    using Error::Error;
};

class Unparseable : public Error {
public:
    using Error::Error;
};

// ── mask errors ─────────────────────────────────────────────────

class BadKernel : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    using Error::Error;
};

class BadCounts : public Error {
public:
    using Error::Error;
};

// ── compositor errors ───────────────────────────────────────────

class MissingAsset : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NoPlacementsPossible : public Error {
public:
    using Error::Error;
};

// ── dataset / pipeline errors ───────────────────────────────────

class IoError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NoValidInstances : public Error {
public:
    using Error::Error;
};

}  // namespace gnv
