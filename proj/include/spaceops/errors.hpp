#pragma once

#include <stdexcept>
#include <string>

namespace spaceops
{

    /// Base of every error thrown by the library. `kind()` is a stable
    /// identifier used in result documents and CLI diagnostics.
    class Error : public std::runtime_error
    {
    public:
        Error(std::string kind, const std::string &detail)
            : std::runtime_error(kind + ": " + detail), kind_(std::move(kind))
        {
        }

        const std::string &kind() const noexcept { return kind_; }

    private:
        std::string kind_;
    };

#define SPACEOPS_DEFINE_ERROR(Name)                                            \
    class Name : public Error                                                  \
    {                                                                          \
    public:                                                                    \
        explicit Name(const std::string &detail) : Error(#Name, detail) {}     \
    }

    // dynamics
    SPACEOPS_DEFINE_ERROR(NonFinite);
    SPACEOPS_DEFINE_ERROR(SurfaceImpact);
    SPACEOPS_DEFINE_ERROR(DegenerateOrbit);
    SPACEOPS_DEFINE_ERROR(InvalidOrbit);

    // scenarios
    SPACEOPS_DEFINE_ERROR(UnsupportedScenario);
    SPACEOPS_DEFINE_ERROR(EpisodeFinished);

    // telemetry
    SPACEOPS_DEFINE_ERROR(ZeroRelativeVelocity);
    SPACEOPS_DEFINE_ERROR(MissingGuardDistance);
    SPACEOPS_DEFINE_ERROR(EmptyRunSet);

    // rendering
    SPACEOPS_DEFINE_ERROR(NotUnit);

    // prompt codec
    SPACEOPS_DEFINE_ERROR(NoExamples);

    // remote agent
    SPACEOPS_DEFINE_ERROR(Timeout);
    SPACEOPS_DEFINE_ERROR(TransportError);
    SPACEOPS_DEFINE_ERROR(ExhaustedRetries);

    // episode store
    SPACEOPS_DEFINE_ERROR(IoError);
    SPACEOPS_DEFINE_ERROR(DuplicateSession);
    SPACEOPS_DEFINE_ERROR(ClosedWriter);
    SPACEOPS_DEFINE_ERROR(CorruptSession);
    SPACEOPS_DEFINE_ERROR(SchemaMismatch);

    SPACEOPS_DEFINE_ERROR(InvalidArgument);

#undef SPACEOPS_DEFINE_ERROR

    class HttpStatus : public Error
    {
    public:
        HttpStatus(int code, const std::string &body)
            : Error("HttpStatus", std::to_string(code) + " " + body), code_(code)
        {
        }

        int code() const noexcept { return code_; }

    private:
        int code_;
    };

    /// Raised by the response parser. The two kinds are kept apart so the agent
    /// layer can tell "no call found" from "call found with a bad value".
    class ParseError : public Error
    {
    public:
        enum class Kind
        {
            Unparseable,
            UnknownEnumValue,
        };

        ParseError(Kind kind, const std::string &detail)
            : Error(kind == Kind::Unparseable ? "Unparseable" : "UnknownEnumValue", detail), parse_kind_(kind)
        {
        }

        Kind parse_kind() const noexcept { return parse_kind_; }

    private:
        Kind parse_kind_;
    };

} // namespace spaceops
