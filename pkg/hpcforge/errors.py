"""Exception hierarchy for hpcforge.

Every error derives from :class:`HpcForgeError` and from the builtin that best
describes it, so callers may catch either.
"""


class HpcForgeError(Exception):
    """Base class for all hpcforge errors."""


class ConfigError(HpcForgeError, ValueError):
    """Invalid or unknown configuration."""


class KeychainUnavailable(HpcForgeError, RuntimeError):
    """Credential storage needs the macOS keychain."""


# parsing

class DecodeError(HpcForgeError, ValueError):
    """Source bytes could not be decoded as UTF-8 or Latin-1."""


class ParseFailure(HpcForgeError, ValueError):
    """Source has more ERROR nodes than the configured threshold."""


class PragmaSyntaxError(HpcForgeError, ValueError):
    """Base class for OpenMP pragma parse errors."""


class NotAPragma(PragmaSyntaxError):
    """Text does not start with ``#pragma omp``."""


class MalformedClause(PragmaSyntaxError):
    """A clause has unbalanced parentheses or an invalid argument list."""


class UnknownDirective(PragmaSyntaxError):
    """The first directive word is not an OpenMP directive."""


# tokompiler

class ReparseFailure(HpcForgeError, RuntimeError):
    """Anonymized code did not parse cleanly."""


class SuffixExhaustion(HpcForgeError, RuntimeError):
    """More distinct symbols than available numeric suffixes."""


class UnknownReplacement(HpcForgeError, KeyError):
    """A replacement token has no entry in the rename map."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


# corpus

class TooShort(HpcForgeError, ValueError):
    """Token sequence is not longer than the requested prefix cut."""


# ompdata

class Unnormalizable(HpcForgeError, ValueError):
    """Pragma directive is outside the supported loop directives."""


class ClauseConflict(Unnormalizable):
    """A variable appears in both a private and a reduction clause."""


class InsufficientNegatives(HpcForgeError, UserWarning):
    """Fewer unannotated loops than requested; all of them are returned."""


# metrics

class EmptySequence(HpcForgeError, ValueError):
    """Perplexity of an empty log-probability sequence."""


class InvalidLogProb(HpcForgeError, ValueError):
    """Token log probability above zero or NaN."""


class TokenizeFailure(HpcForgeError, ValueError):
    """Candidate or reference produced no tokens."""


class MissingOperand(HpcForgeError, ValueError):
    """Reduction operator evaluation without a reduction on both sides."""


class NonPositive(HpcForgeError, ValueError):
    """Speedup must be strictly positive."""


# harness

class EndpointUnreachable(HpcForgeError, ConnectionError):
    """Model endpoint did not answer after all retries."""


class InvalidGeneration(HpcForgeError, ValueError):
    """Generated pragma does not parse."""


class SpanDrift(HpcForgeError, ValueError):
    """Loop span no longer points at a ``for`` statement."""


class InjectionError(HpcForgeError, RuntimeError):
    """Patched source no longer parses cleanly."""


class MissingVerdict(HpcForgeError, KeyError):
    """A false-positive sample has no compile-and-run verdict."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ToolchainMissing(HpcForgeError, RuntimeError):
    """Build or run command not found on this machine."""


class SchemaMismatch(HpcForgeError, ValueError):
    """Report JSON does not follow a known schema."""
