"""Exception hierarchy shared across the package."""


class MinsurfError(Exception):
    """Base class for all package errors."""


class SignatureError(MinsurfError):
    """Operands carry incompatible signature indices or scalar types."""


class UnsupportedSignature(MinsurfError):
    """Requested signature index has no implemented convention."""


class ZeroDivisorError(MinsurfError):
    """Division by a split-complex zero divisor (re**2 == im**2)."""


class TangencyError(MinsurfError):
    """Vector is not tangent to the quadric at the given point."""


class BaseMismatch(MinsurfError):
    """Tangent vectors live at different base points."""


class BoundaryError(MinsurfError):
    """Grid index too close to the boundary for the requested stencil."""


class DegenerateMetric(MinsurfError):
    """Pulled-back metric is (numerically) degenerate at the point."""


class NegativeDefiniteMetric(DegenerateMetric):
    """Pulled-back metric is negative definite; only the positive
    convention e^{2u} > 0 is supported."""


class NonMinimal(MinsurfError):
    """Operation requires a minimal immersion but |H| exceeds tolerance."""


class ComplexLocus(MinsurfError):
    """Operation undefined on the (para-)complex stratum (gamma ~ 0)."""


class EmptyInterior(MinsurfError):
    """No valid interior points remain after masking."""


class CFLViolation(MinsurfError):
    """Hyperbolic step sizes violate the CFL bound hy <= hx."""


class BranchMismatch(MinsurfError):
    """Kahler function values incompatible with the requested branch."""


class DomainViolation(MinsurfError):
    """Grid point violates the admissible-region inequalities."""


class EmptyMask(DomainViolation):
    """No grid point satisfies the admissible-region inequalities."""


class CompatViolation(MinsurfError):
    """Fundamental data fails the compatibility equations beyond tolerance."""


class DriftExceeded(MinsurfError):
    """Frame-integration constraint drift exceeded its budget."""


class FrameConstructionError(MinsurfError):
    """Could not build a well-conditioned normal frame / initial frame."""
