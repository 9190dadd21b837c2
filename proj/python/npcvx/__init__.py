"""Neyman-Pearson classification by convex aggregation of base classifiers."""


class Error(Exception):
    """Raised by the native library; ``code`` is a short machine-readable tag."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code
        self.message = message


class ValidationError(Error, ValueError):
    pass


class SolverError(Error, RuntimeError):
    pass


from ._core import (  # noqa: E402
    Surrogate,
    alpha_kappa,
    binomial_tail_exact,
    ccp_bound,
    decision_function,
    kappa,
    n0_and_bound,
    np_lemma_oracle,
    pooled_bound,
    run_experiment,
    solve,
    solve_ccp,
    stump_dictionary,
    sweep_binomial_lemmas,
)

__all__ = [
    "Error",
    "ValidationError",
    "SolverError",
    "Surrogate",
    "alpha_kappa",
    "binomial_tail_exact",
    "ccp_bound",
    "decision_function",
    "kappa",
    "n0_and_bound",
    "np_lemma_oracle",
    "pooled_bound",
    "run_experiment",
    "solve",
    "solve_ccp",
    "stump_dictionary",
    "sweep_binomial_lemmas",
]
