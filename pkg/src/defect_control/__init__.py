"""
defect-control - optimal control of elliptic equations with a defect-regularized state law.

The state law -div(grad u) + phi(u) = v is relaxed by a residual field w that
is penalized by lam/2 |grad w|^2. Pairs (u, v) are then free and the problem
is solved by steepest descent, with an exponential-barrier outer loop for
pointwise constraints and a lambda-continuation study toward the classical
problem.
"""

__version__ = "0.1.0"

# Lazy imports via PEP 562 so that `import defect_control` does not pull in
# scipy and pandas until a solver is used.
_LAZY_IMPORTS = {
    "ProblemSpec": "defect_control.model.problem",
    "Nonlinearity": "defect_control.model.nonlinearity",
    "ScalarField": "defect_control.numerics.fields",
    "StiffnessSystem": "defect_control.numerics.linalg",
    "build_grid": "defect_control.numerics.grid",
    "run_descent": "defect_control.solvers.descent",
    "run_barrier": "defect_control.solvers.barrier",
    "run_continuation": "defect_control.study.continuation",
    "classical_kkt_solve": "defect_control.study.oracle",
    "load_run_config": "defect_control.config",
}


def __getattr__(name: str):  # type: ignore[no-untyped-def]
    if name in _LAZY_IMPORTS:
        import importlib

        module = importlib.import_module(_LAZY_IMPORTS[name])
        value = getattr(module, name)
        globals()[name] = value  # cache for subsequent access
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [*_LAZY_IMPORTS, "__version__"]
