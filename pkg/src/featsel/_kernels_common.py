"""Bits shared by the compiled and fallback kernel implementations."""


class KernelSingularError(Exception):
    """Raised by kernels when a Cholesky factorization fails.

    ``class_index`` is the class whose covariance was not positive
    definite, or -1 for a pooled covariance.
    """

    def __init__(self, class_index: int):
        super().__init__(f"covariance not positive definite (class {class_index})")
        self.class_index = class_index
