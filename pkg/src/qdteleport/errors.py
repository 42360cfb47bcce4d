class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConsistencyError(RuntimeError):
    """A numerical self-check failed, e.g. an imaginary residue that should vanish."""
